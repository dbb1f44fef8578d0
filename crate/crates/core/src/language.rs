//! Factor languages of morphic shifts and their extension graphs.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::returns::ReturnMorphism;
use crate::words::{shortlex, Alphabet, Letter, LetterSet, Morphism, Word};
use crate::CancelToken;

/// A factorial set of words that can list its factors of each length.
pub trait Language: Send + Sync {
    fn alphabet(&self) -> &Alphabet;
    fn factors(&self, n: usize) -> Result<Arc<BTreeSet<Word>>>;

    fn contains(&self, w: &[Letter]) -> Result<bool> {
        Ok(self.factors(w.len())?.contains(&Word::from(w)))
    }
}

/// `x = τ(σ^ω(seed))` where `σ^power` is prolongable on `seed`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MorphicSpec {
    inner: Morphism,
    outer: Morphism,
    seed: Letter,
    power: usize,
}

impl MorphicSpec {
    /// When no power of `inner` is prolongable on `seed`, the seed is moved
    /// to the letter found by [`Morphism::prolongable_power_from`]; for a
    /// primitive `inner` the shift does not depend on the seed.
    pub fn new(inner: Morphism, outer: Option<Morphism>, seed: Letter) -> Result<Self> {
        if !inner.is_endomorphism() {
            return Err(Error::NotEndomorphism);
        }
        if !inner.domain().contains(seed) {
            return Err(Error::LetterNotInDomain(format!("{}", seed.0)));
        }
        let outer = outer.unwrap_or_else(|| Morphism::identity(inner.domain()));
        if outer.domain() != inner.domain() {
            return Err(Error::AlphabetMismatch);
        }
        let (power, seed) = match inner.prolongable_power_from(seed) {
            Ok(p) => p,
            Err(Error::NoGrowingLetter) => inner.prolongable_power()?,
            Err(e) => return Err(e),
        };
        Ok(MorphicSpec { inner, outer, seed, power })
    }

    pub fn pure(inner: Morphism, seed: Letter) -> Result<Self> {
        MorphicSpec::new(inner, None, seed)
    }

    /// The shift `σ·X`.
    pub fn image_by(&self, sigma: &Morphism) -> Result<Self> {
        let outer = crate::words::compose(sigma, &self.outer)?.morphism;
        MorphicSpec::new(self.inner.clone(), Some(outer), self.seed)
    }

    pub fn inner(&self) -> &Morphism {
        &self.inner
    }

    pub fn outer(&self) -> &Morphism {
        &self.outer
    }

    pub fn seed(&self) -> Letter {
        self.seed
    }

    pub fn power(&self) -> usize {
        self.power
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.outer.codomain()
    }

    pub fn is_pure(&self) -> bool {
        self.outer == Morphism::identity(self.inner.domain())
    }

    /// The same shift with the outer morphism dropped.
    pub fn pure_part(&self) -> MorphicSpec {
        MorphicSpec {
            inner: self.inner.clone(),
            outer: Morphism::identity(self.inner.domain()),
            seed: self.seed,
            power: self.power,
        }
    }

    /// Prefix of length `len` of `σ^ω(seed)`.
    pub fn pure_prefix(&self, len: usize) -> Word {
        let step = self.inner.power(self.power).expect("inner is an endomorphism");
        let mut w = Word::letter(self.seed);
        // w is always a prefix of σ'^n(seed), so this terminates because seed grows
        while w.len() < len {
            w = step.apply_prefix(&w, len);
        }
        w.0.truncate(len);
        w
    }

    /// Prefix of length `len` of `x`.
    pub fn prefix(&self, len: usize) -> Word {
        let y = self.pure_prefix(len);
        self.outer.apply_prefix(&y, len)
    }
}

/// Size limit for cached factor sets, counted in words.
const CACHE_WORDS: usize = 4_000_000;

#[derive(Default)]
struct Cache {
    pure: BTreeMap<usize, Arc<BTreeSet<Word>>>,
    coded: BTreeMap<usize, Arc<BTreeSet<Word>>>,
    words: usize,
    two_factors: Option<Arc<BTreeSet<(Letter, Letter)>>>,
    powers: Vec<Arc<Vec<Word>>>,
}

impl Cache {
    fn store(&mut self, coded: bool, n: usize, set: Arc<BTreeSet<Word>>) {
        if self.words + set.len() > CACHE_WORDS {
            self.pure.clear();
            self.coded.clear();
            self.words = 0;
        }
        self.words += set.len();
        if coded {
            self.coded.insert(n, set);
        } else {
            self.pure.insert(n, set);
        }
    }
}

/// Language oracle of a morphic shift. Factor sets are computed exactly
/// for primitive inner morphisms and cached by length.
pub struct Shift {
    spec: MorphicSpec,
    exact: bool,
    cache: Mutex<Cache>,
    cancel: CancelToken,
}

impl std::fmt::Debug for Shift {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Shift").field("spec", &self.spec).field("exact", &self.exact).finish()
    }
}

impl Shift {
    pub fn new(spec: MorphicSpec) -> Result<Self> {
        if !spec.inner.is_primitive()? {
            return Err(Error::NotPrimitive);
        }
        Ok(Shift { spec, exact: true, cache: Mutex::default(), cancel: CancelToken::default() })
    }

    /// Accepts non-primitive inner morphisms. Factors are then read off
    /// iterated images of the seed until the factor set stops changing,
    /// which is a heuristic rather than a certificate.
    pub fn exploratory(spec: MorphicSpec) -> Result<Self> {
        let exact = spec.inner.is_primitive()?;
        Ok(Shift { spec, exact, cache: Mutex::default(), cancel: CancelToken::default() })
    }

    pub fn with_cancel(mut self, cancel: CancelToken) -> Self {
        self.cancel = cancel;
        self
    }

    pub fn spec(&self) -> &MorphicSpec {
        &self.spec
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn cancel_token(&self) -> &CancelToken {
        &self.cancel
    }

    fn two_factors(&self) -> Arc<BTreeSet<(Letter, Letter)>> {
        if let Some(t) = self.cache.lock().unwrap().two_factors.clone() {
            return t;
        }
        let s = &self.spec.inner;
        let mut set: BTreeSet<(Letter, Letter)> = BTreeSet::new();
        for img in s.images() {
            set.extend(img.windows(2).map(|p| (p[0], p[1])));
        }
        let mut todo: Vec<(Letter, Letter)> = set.iter().copied().collect();
        while let Some((a, b)) = todo.pop() {
            let left = s.image(a);
            let right = s.image(b);
            let mut pairs: Vec<(Letter, Letter)> = left.windows(2).map(|p| (p[0], p[1])).collect();
            pairs.extend(right.windows(2).map(|p| (p[0], p[1])));
            pairs.push((*left.last().unwrap(), right[0]));
            for p in pairs {
                if set.insert(p) {
                    todo.push(p);
                }
            }
        }
        let set = Arc::new(set);
        self.cache.lock().unwrap().two_factors = Some(set.clone());
        set
    }

    /// `σ^k(a)` for every letter `a`.
    fn iterated_images(&self, k: usize) -> Arc<Vec<Word>> {
        let mut cache = self.cache.lock().unwrap();
        if cache.powers.is_empty() {
            cache.powers.push(Arc::new(self.spec.inner.domain().letters().map(Word::letter).collect()));
        }
        while cache.powers.len() <= k {
            let last = cache.powers.last().unwrap().clone();
            let next: Vec<Word> = last.iter().map(|w| self.spec.inner.apply(w).unwrap()).collect();
            cache.powers.push(Arc::new(next));
        }
        cache.powers[k].clone()
    }

    fn pure_factors(&self, n: usize) -> Result<Arc<BTreeSet<Word>>> {
        if let Some(s) = self.cache.lock().unwrap().pure.get(&n) {
            return Ok(s.clone());
        }
        self.cancel.check()?;
        let alphabet = self.spec.inner.domain();
        let set: BTreeSet<Word> = match n {
            0 => BTreeSet::from([Word::empty()]),
            1 => alphabet.letters().map(Word::letter).collect(),
            _ => {
                let mut k = 0;
                let images = loop {
                    let imgs = self.iterated_images(k);
                    if imgs.iter().all(|w| w.len() >= n - 1) {
                        break imgs;
                    }
                    k += 1;
                };
                let mut set = BTreeSet::new();
                for img in images.iter() {
                    set.extend(img.windows(n).map(Word::from));
                }
                for &(a, b) in self.two_factors().iter() {
                    let (u, v) = (&images[a.index()], &images[b.index()]);
                    let mut join: Vec<Letter> = u[u.len() - (n - 1)..].to_vec();
                    join.extend_from_slice(&v[..n - 1]);
                    set.extend(join.windows(n).map(Word::from));
                }
                set
            }
        };
        let set = Arc::new(set);
        self.cache.lock().unwrap().store(false, n, set.clone());
        Ok(set)
    }

    fn coded_factors(&self, n: usize) -> Result<Arc<BTreeSet<Word>>> {
        if let Some(s) = self.cache.lock().unwrap().coded.get(&n) {
            return Ok(s.clone());
        }
        let set: BTreeSet<Word> = if n == 0 {
            BTreeSet::from([Word::empty()])
        } else {
            let mut set = BTreeSet::new();
            for u in self.pure_factors(n)?.iter() {
                let img = self.spec.outer.apply(u)?;
                set.extend(img.windows(n).map(Word::from));
            }
            set
        };
        let set = Arc::new(set);
        self.cache.lock().unwrap().store(true, n, set.clone());
        Ok(set)
    }

    fn scanned_factors(&self, n: usize) -> Result<Arc<BTreeSet<Word>>> {
        if let Some(s) = self.cache.lock().unwrap().coded.get(&n) {
            return Ok(s.clone());
        }
        let set = Arc::new(scan_factors(&self.spec, n, &self.cancel)?);
        self.cache.lock().unwrap().store(true, n, set.clone());
        Ok(set)
    }
}

impl Language for Shift {
    fn alphabet(&self) -> &Alphabet {
        self.spec.alphabet()
    }

    fn factors(&self, n: usize) -> Result<Arc<BTreeSet<Word>>> {
        if !self.exact {
            return self.scanned_factors(n);
        }
        if self.spec.is_pure() {
            self.pure_factors(n)
        } else {
            self.coded_factors(n)
        }
    }
}

/// Factors of length `n` read off `τ(σ^k(seed))`, stopping once the set is
/// unchanged for two consecutive `k` and the image is long enough.
pub fn scan_factors(spec: &MorphicSpec, n: usize, cancel: &CancelToken) -> Result<BTreeSet<Word>> {
    let step = spec.inner.power(spec.power)?;
    let longest = spec.outer.max_image_len().max(step.max_image_len());
    let mut y = Word::letter(spec.seed);
    let mut prev: Option<BTreeSet<Word>> = None;
    let mut stable = 0;
    for _ in 0..64 {
        cancel.check()?;
        let x = spec.outer.apply(&y)?;
        let set: BTreeSet<Word> =
            if n == 0 { BTreeSet::from([Word::empty()]) } else { x.windows(n).map(Word::from).collect() };
        if prev.as_ref() == Some(&set) {
            stable += 1;
        } else {
            stable = 0;
        }
        if stable >= 1 && x.len() >= 4 * n + 2 * longest {
            return Ok(set);
        }
        prev = Some(set);
        let next = step.apply(&y)?;
        if next.len() > 1 << 24 {
            break;
        }
        y = next;
    }
    prev.ok_or_else(|| Error::Invalid("empty scan".into()))
}

/// Factorial closure of a finite set of words.
#[derive(Clone, Debug)]
pub struct FiniteLanguage {
    alphabet: Alphabet,
    words: Vec<Word>,
}

impl FiniteLanguage {
    pub fn new(alphabet: Alphabet, words: Vec<Word>) -> Self {
        FiniteLanguage { alphabet, words }
    }

    pub fn max_len(&self) -> usize {
        self.words.iter().map(|w| w.len()).max().unwrap_or(0)
    }
}

impl Language for FiniteLanguage {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn factors(&self, n: usize) -> Result<Arc<BTreeSet<Word>>> {
        let mut set = BTreeSet::new();
        if n == 0 {
            set.insert(Word::empty());
        } else {
            for w in &self.words {
                set.extend(w.windows(n).map(Word::from));
            }
        }
        Ok(Arc::new(set))
    }
}

/// Left, right and bi-extensions of a factor.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExtensionData {
    pub left: LetterSet,
    pub right: LetterSet,
    pub bi: BTreeSet<(Letter, Letter)>,
}

impl ExtensionData {
    pub fn graph(&self) -> ExtensionGraph {
        ExtensionGraph { left: self.left, right: self.right, edges: self.bi.iter().copied().collect() }
    }

    /// Some `(a, b)` such that every bi-extension starts with `a` or ends with `b`.
    pub fn is_ordinary(&self) -> bool {
        self.bi.iter().any(|&(a, b)| self.bi.iter().all(|&(x, y)| x == a || y == b))
    }
}

/// Bipartite graph on left and right extension letters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtensionGraph {
    #[serde(skip)]
    pub left: LetterSet,
    #[serde(skip)]
    pub right: LetterSet,
    pub edges: Vec<(Letter, Letter)>,
}

impl ExtensionGraph {
    pub fn vertex_count(&self) -> usize {
        self.left.len() + self.right.len()
    }

    fn components(&self) -> (usize, bool) {
        // vertices: left letters at 0..64, right letters at 64..128
        let mut dsu = Dsu::new(128);
        let mut acyclic = true;
        for &(a, b) in &self.edges {
            if !dsu.union(a.index(), 64 + b.index()) {
                acyclic = false;
            }
        }
        let mut roots = BTreeSet::new();
        for a in self.left.iter() {
            roots.insert(dsu.find(a.index()));
        }
        for b in self.right.iter() {
            roots.insert(dsu.find(64 + b.index()));
        }
        (roots.len(), acyclic)
    }

    pub fn is_connected(&self) -> bool {
        self.components().0 <= 1
    }

    pub fn is_acyclic(&self) -> bool {
        self.components().1
    }

    pub fn is_tree(&self) -> bool {
        self.vertex_count() > 0 && self.edges.len() + 1 == self.vertex_count() && self.is_connected()
    }
}

pub(crate) struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    pub(crate) fn new(n: usize) -> Self {
        Dsu { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != r {
            let next = self.parent[c];
            self.parent[c] = r;
            c = next;
        }
        r
    }

    /// Returns false when `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Extension data of every factor of length `n`.
pub fn extension_table(lang: &dyn Language, n: usize) -> Result<BTreeMap<Word, ExtensionData>> {
    let mut table: BTreeMap<Word, ExtensionData> =
        lang.factors(n)?.iter().map(|w| (w.clone(), ExtensionData::default())).collect();
    for u in lang.factors(n + 2)?.iter() {
        let (a, b) = (u[0], u[n + 1]);
        let e = table.entry(Word::from(&u[1..=n])).or_default();
        e.left.insert(a);
        e.right.insert(b);
        e.bi.insert((a, b));
    }
    for u in lang.factors(n + 1)?.iter() {
        table.entry(Word::from(&u[1..])).or_default().left.insert(u[0]);
        table.entry(Word::from(&u[..n])).or_default().right.insert(u[n]);
    }
    Ok(table)
}

pub fn extensions(lang: &dyn Language, w: &[Letter]) -> Result<ExtensionData> {
    if !lang.contains(w)? {
        return Err(Error::NotAFactor(lang.alphabet().show(w)));
    }
    let n = w.len();
    let mut e = ExtensionData::default();
    for u in lang.factors(n + 2)?.iter() {
        if &u[1..=n] == w {
            e.left.insert(u[0]);
            e.right.insert(u[n + 1]);
            e.bi.insert((u[0], u[n + 1]));
        }
    }
    for u in lang.factors(n + 1)?.iter() {
        if &u[1..] == w {
            e.left.insert(u[0]);
        }
        if &u[..n] == w {
            e.right.insert(u[n]);
        }
    }
    Ok(e)
}

pub fn extension_graph(lang: &dyn Language, w: &[Letter]) -> Result<ExtensionGraph> {
    Ok(extensions(lang, w)?.graph())
}

pub fn is_ordinary(lang: &dyn Language, w: &[Letter]) -> Result<bool> {
    Ok(extensions(lang, w)?.is_ordinary())
}

pub fn complexity(lang: &dyn Language, n: usize) -> Result<usize> {
    Ok(lang.factors(n)?.len())
}

/// Factors of length `< n` whose extension graph is not a tree, in shortlex order.
pub fn dendric_up_to(lang: &dyn Language, n: usize) -> Result<Vec<Word>> {
    let mut bad = Vec::new();
    for k in 0..n {
        for (w, e) in extension_table(lang, k)? {
            if !e.graph().is_tree() {
                bad.push(w);
            }
        }
    }
    bad.sort_by(shortlex);
    Ok(bad)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Probe {
    /// Complexity stopped growing; the value is the stalled complexity.
    Periodic(usize),
    /// No stall below the cap. This is evidence, not proof, of aperiodicity.
    NoStallUpTo(usize),
}

pub fn periodicity_probe(lang: &dyn Language, cap: usize) -> Result<Probe> {
    let mut prev = complexity(lang, 0)?;
    for n in 0..cap {
        let next = complexity(lang, n + 1)?;
        if next <= prev {
            return Ok(Probe::Periodic(prev));
        }
        prev = next;
    }
    Ok(Probe::NoStallUpTo(cap))
}

/// Edges `(a, b)` of the extension graph of `v` with `σ(a)` ending in `s`
/// and `σ(b)w` starting with `p`.
pub fn restricted_extension_graph(
    lang: &dyn Language,
    v: &[Letter],
    rho: &ReturnMorphism,
    s: &[Letter],
    p: &[Letter],
) -> Result<ExtensionGraph> {
    let e = extensions(lang, v)?;
    let left = rho.left_domain(s).intersection(e.left);
    let right = rho.right_domain(p).intersection(e.right);
    let edges = e.bi.iter().copied().filter(|&(a, b)| left.contains(a) && right.contains(b)).collect();
    Ok(ExtensionGraph { left, right, edges })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shift(s: &str) -> Shift {
        Shift::new(MorphicSpec::pure(Morphism::parse_inline(s).unwrap(), Letter(0)).unwrap()).unwrap()
    }

    fn words(a: &Alphabet, ws: &[&str]) -> BTreeSet<Word> {
        ws.iter().map(|w| a.word(w).unwrap()).collect()
    }

    #[test]
    fn fibonacci_factors() {
        let f = shift("0>01 1>0");
        let a = f.alphabet().clone();
        assert_eq!(*f.factors(3).unwrap(), words(&a, &["001", "010", "100", "101"]));
        for n in 0..=30 {
            assert_eq!(complexity(&f, n).unwrap(), n + 1);
        }
    }

    #[test]
    fn thue_morse_factors() {
        let t = shift("0>01 1>10");
        let a = t.alphabet().clone();
        assert_eq!(*t.factors(2).unwrap(), words(&a, &["00", "01", "10", "11"]));
        assert!(!is_ordinary(&t, &[]).unwrap());
    }

    #[test]
    fn fibonacci_extensions() {
        let f = shift("0>01 1>0");
        let bi = |w: &[Letter]| extensions(&f, w).unwrap().bi.into_iter().map(|(a, b)| (a.0, b.0)).collect::<Vec<_>>();
        assert_eq!(bi(&[]), vec![(0, 0), (0, 1), (1, 0)]);
        assert_eq!(bi(&[Letter(0)]), vec![(0, 1), (1, 0), (1, 1)]);
        assert_eq!(bi(&[Letter(1)]), vec![(0, 0)]);
        assert!(is_ordinary(&f, &[]).unwrap());
        assert!(matches!(extensions(&f, &[Letter(1), Letter(1)]), Err(Error::NotAFactor(_))));
    }

    #[test]
    fn finite_language_graphs() {
        let a = Alphabet::digits(2);
        let lang = FiniteLanguage::new(
            a.clone(),
            ["001", "010", "011", "100", "110", "111"].iter().map(|w| a.word(w).unwrap()).collect(),
        );
        let g0 = extension_graph(&lang, &[Letter(0)]).unwrap();
        assert_eq!(g0.edges, vec![(Letter(0), Letter(1)), (Letter(1), Letter(0))]);
        assert!(!g0.is_connected());
        let ge = extension_graph(&lang, &[]).unwrap();
        assert_eq!(ge.edges.len(), 4);
        assert!(!ge.is_acyclic());
    }

    #[test]
    fn probes() {
        let periodic = MorphicSpec::new(
            Morphism::parse_inline("0>00").unwrap(),
            Some(Morphism::parse_inline("0>01").unwrap()),
            Letter(0),
        )
        .unwrap();
        let p = Shift::new(periodic).unwrap();
        assert_eq!(periodicity_probe(&p, 20).unwrap(), Probe::Periodic(2));
        assert_eq!(periodicity_probe(&shift("0>01 1>0"), 20).unwrap(), Probe::NoStallUpTo(20));
        assert_eq!(periodicity_probe(&shift("0>0012 1>12 2>012"), 20).unwrap(), Probe::NoStallUpTo(20));
    }

    #[test]
    fn chacon_complexity() {
        let c = shift("0>0012 1>12 2>012");
        assert_eq!(complexity(&c, 5).unwrap(), 11);
        assert_eq!(complexity(&c, 0).unwrap(), 1);
    }

    #[test]
    fn prefix_generation() {
        let f = MorphicSpec::pure(Morphism::parse_inline("0>01 1>0").unwrap(), Letter(0)).unwrap();
        assert_eq!(f.alphabet().render(&f.prefix(8)), "01001010");
        let spec = MorphicSpec::pure(Morphism::parse_inline("0>1 1>01").unwrap(), Letter(0)).unwrap();
        assert_eq!(spec.power(), 2);
        assert_eq!(spec.alphabet().render(&spec.prefix(5)), "01101");
    }
}
