//! Letters, words, alphabets and morphisms between free monoids.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a letter inside its alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter(pub u8);

impl Letter {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

pub const MAX_ALPHABET: usize = 64;

/// Ordered symbol table. Letter `i` is displayed as `symbols[i]`; symbols
/// are kept sorted so that letter order and symbol order agree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    pub fn new(symbols: impl IntoIterator<Item = char>) -> Result<Self> {
        let mut symbols: Vec<char> = symbols.into_iter().collect();
        symbols.sort_unstable();
        let before = symbols.len();
        symbols.dedup();
        if symbols.len() != before {
            return Err(Error::Invalid("duplicate symbol in alphabet".into()));
        }
        if symbols.len() > MAX_ALPHABET {
            return Err(Error::Invalid(format!("alphabets are limited to {MAX_ALPHABET} letters")));
        }
        if symbols.iter().any(|c| c.is_whitespace() || *c == '#') {
            return Err(Error::Invalid("symbols must be printable".into()));
        }
        Ok(Alphabet { symbols })
    }

    /// `{0, 1, ..., d-1}`.
    pub fn digits(d: usize) -> Self {
        Alphabet { symbols: (0..d).map(symbol_for).collect() }
    }

    /// `{1, ..., k}`, the alphabet of derived sequences.
    pub fn canonical(k: usize) -> Self {
        Alphabet { symbols: (1..=k).map(symbol_for).collect() }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + Clone + '_ {
        (0..self.symbols.len()).map(|i| Letter(i as u8))
    }

    pub fn full(&self) -> LetterSet {
        LetterSet::from_iter(self.letters())
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn symbol(&self, l: Letter) -> char {
        self.symbols[l.index()]
    }

    pub fn letter(&self, c: char) -> Option<Letter> {
        self.symbols.binary_search(&c).ok().map(|i| Letter(i as u8))
    }

    pub fn contains(&self, l: Letter) -> bool {
        l.index() < self.symbols.len()
    }

    pub fn word(&self, s: &str) -> Result<Word> {
        let s = if s == "ε" { "" } else { s };
        s.chars()
            .map(|c| self.letter(c).ok_or_else(|| Error::LetterNotInDomain(c.to_string())))
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    /// Plain rendering; the empty word renders as the empty string.
    pub fn render(&self, w: &[Letter]) -> String {
        w.iter().map(|&l| self.symbol(l)).collect()
    }

    /// Rendering for humans; the empty word renders as `ε`.
    pub fn show(&self, w: &[Letter]) -> String {
        if w.is_empty() {
            "ε".to_string()
        } else {
            self.render(w)
        }
    }

    pub fn render_set(&self, s: LetterSet) -> String {
        s.iter().map(|l| self.symbol(l)).collect()
    }
}

fn symbol_for(i: usize) -> char {
    const TABLE: &str = "0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ@$";
    TABLE.chars().nth(i).expect("alphabet too large")
}

/// Finite word over an alphabet given by context.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    pub fn concat(&self, other: &[Letter]) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(other);
        Word(v)
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l)
    }

    pub fn into_vec(self) -> Vec<Letter> {
        self.0
    }
}

impl Deref for Word {
    type Target = [Letter];
    fn deref(&self) -> &[Letter] {
        &self.0
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        Word(v)
    }
}

impl From<&[Letter]> for Word {
    fn from(v: &[Letter]) -> Self {
        Word(v.to_vec())
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

/// Order used for reporting factors: by length, then lexicographically.
pub fn shortlex(a: &Word, b: &Word) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// Set of letters of an alphabet with at most 64 letters.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct LetterSet(pub u64);

impl LetterSet {
    pub const EMPTY: LetterSet = LetterSet(0);

    pub fn singleton(l: Letter) -> Self {
        LetterSet(1 << l.0)
    }

    pub fn contains(self, l: Letter) -> bool {
        self.0 >> l.0 & 1 == 1
    }

    pub fn insert(&mut self, l: Letter) {
        self.0 |= 1 << l.0
    }

    pub fn remove(&mut self, l: Letter) {
        self.0 &= !(1 << l.0)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, o: Self) -> Self {
        LetterSet(self.0 | o.0)
    }

    pub fn intersection(self, o: Self) -> Self {
        LetterSet(self.0 & o.0)
    }

    pub fn difference(self, o: Self) -> Self {
        LetterSet(self.0 & !o.0)
    }

    pub fn is_subset(self, o: Self) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn first(self) -> Option<Letter> {
        (self.0 != 0).then(|| Letter(self.0.trailing_zeros() as u8))
    }

    pub fn iter(self) -> impl Iterator<Item = Letter> + Clone {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros();
            bits &= bits - 1;
            Some(Letter(i as u8))
        })
    }
}

impl FromIterator<Letter> for LetterSet {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        let mut s = LetterSet::EMPTY;
        for l in iter {
            s.insert(l);
        }
        s
    }
}

// Lexicographic on the sorted element lists, so canonical forms read naturally.
impl Ord for LetterSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for LetterSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for LetterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|l| l.0)).finish()
    }
}

/// All start positions of `u` in `w`. The empty word occurs at `0..=|w|`.
pub fn occurrences(u: &[Letter], w: &[Letter]) -> Vec<usize> {
    if u.is_empty() {
        return (0..=w.len()).collect();
    }
    if u.len() > w.len() {
        return Vec::new();
    }
    w.windows(u.len()).enumerate().filter(|(_, win)| *win == u).map(|(i, _)| i).collect()
}

pub fn longest_common_prefix<'a>(a: &'a [Letter], b: &[Letter]) -> &'a [Letter] {
    let n = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    &a[..n]
}

pub fn longest_common_suffix<'a>(a: &'a [Letter], b: &[Letter]) -> &'a [Letter] {
    let n = a.iter().rev().zip(b.iter().rev()).take_while(|(x, y)| x == y).count();
    &a[a.len() - n..]
}

/// Non-erasing morphism `domain* -> codomain*`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Morphism {
    domain: Alphabet,
    codomain: Alphabet,
    images: Vec<Word>,
}

/// Result of [`compose`]; `codomain_shrunk` is set when some letter of the
/// outer codomain no longer occurs in the composite.
#[derive(Clone, Debug)]
pub struct Composition {
    pub morphism: Morphism,
    pub codomain_shrunk: bool,
}

impl Morphism {
    /// Images must be non-empty, use letters of `codomain`, and every letter
    /// of `codomain` must occur in some image.
    pub fn new(domain: Alphabet, codomain: Alphabet, images: Vec<Word>) -> Result<Self> {
        if images.len() != domain.len() {
            return Err(Error::Invalid("one image per domain letter is required".into()));
        }
        let mut seen = LetterSet::EMPTY;
        for (i, img) in images.iter().enumerate() {
            if img.is_empty() {
                return Err(Error::Invalid(format!(
                    "image of {} is empty",
                    domain.symbols()[i]
                )));
            }
            for &l in img.iter() {
                if !codomain.contains(l) {
                    return Err(Error::LetterNotInDomain(format!("{}", l.0)));
                }
                seen.insert(l);
            }
        }
        if seen != codomain.full() {
            return Err(Error::Invalid("codomain has letters missing from every image".into()));
        }
        Ok(Morphism { domain, codomain, images })
    }

    /// Builds a morphism from `(letter, image)` pairs written with symbols.
    /// The domain is the set of left-hand symbols and the codomain the set
    /// of symbols used in images.
    pub fn from_rules<S: AsRef<str>>(rules: &[(char, S)]) -> Result<Self> {
        let domain = Alphabet::new(rules.iter().map(|(c, _)| *c))?;
        let mut used: Vec<char> = rules.iter().flat_map(|(_, s)| s.as_ref().chars()).collect();
        used.sort_unstable();
        used.dedup();
        let codomain = Alphabet::new(used)?;
        let mut images = vec![Word::empty(); domain.len()];
        for (c, s) in rules {
            images[domain.letter(*c).unwrap().index()] = codomain.word(s.as_ref())?;
        }
        Morphism::new(domain, codomain, images)
    }

    /// Shorthand for tests and fixtures: `"0>01 1>0"`.
    pub fn parse_inline(s: &str) -> Result<Self> {
        let rules = s
            .split_whitespace()
            .map(|r| {
                let (a, img) = r
                    .split_once('>')
                    .ok_or_else(|| Error::Invalid(format!("bad rule {r:?}")))?;
                let mut cs = a.chars();
                match (cs.next(), cs.next()) {
                    (Some(c), None) => Ok((c, img.to_string())),
                    _ => Err(Error::Invalid(format!("bad rule {r:?}"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Morphism::from_rules(&rules)
    }

    pub fn identity(alphabet: &Alphabet) -> Self {
        Morphism {
            domain: alphabet.clone(),
            codomain: alphabet.clone(),
            images: alphabet.letters().map(Word::letter).collect(),
        }
    }

    /// Letter-to-letter bijection sending `a` to `perm[a]`.
    pub fn permutation(alphabet: &Alphabet, perm: &[Letter]) -> Result<Self> {
        let set: LetterSet = perm.iter().copied().collect();
        if perm.len() != alphabet.len() || set != alphabet.full() {
            return Err(Error::Invalid("not a permutation of the alphabet".into()));
        }
        Ok(Morphism {
            domain: alphabet.clone(),
            codomain: alphabet.clone(),
            images: perm.iter().map(|&l| Word::letter(l)).collect(),
        })
    }

    pub fn domain(&self) -> &Alphabet {
        &self.domain
    }

    pub fn codomain(&self) -> &Alphabet {
        &self.codomain
    }

    pub fn image(&self, a: Letter) -> &Word {
        &self.images[a.index()]
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn is_endomorphism(&self) -> bool {
        self.domain == self.codomain
    }

    pub fn max_image_len(&self) -> usize {
        self.images.iter().map(|w| w.len()).max().unwrap_or(0)
    }

    pub fn min_image_len(&self) -> usize {
        self.images.iter().map(|w| w.len()).min().unwrap_or(0)
    }

    pub fn is_injective_on_letters(&self) -> bool {
        let mut v: Vec<&Word> = self.images.iter().collect();
        v.sort();
        v.windows(2).all(|p| p[0] != p[1])
    }

    pub fn apply(&self, w: &[Letter]) -> Result<Word> {
        let mut out = Vec::with_capacity(w.len() * self.max_image_len());
        for &l in w {
            let img = self
                .images
                .get(l.index())
                .ok_or_else(|| Error::LetterNotInDomain(format!("{}", l.0)))?;
            out.extend_from_slice(img);
        }
        Ok(Word(out))
    }

    /// Applies the morphism, keeping only the first `limit` letters.
    pub fn apply_prefix(&self, w: &[Letter], limit: usize) -> Word {
        let mut out = Vec::with_capacity(limit);
        for &l in w {
            if out.len() >= limit {
                break;
            }
            out.extend_from_slice(&self.images[l.index()]);
        }
        out.truncate(limit);
        Word(out)
    }

    pub fn power(&self, k: usize) -> Result<Morphism> {
        if !self.is_endomorphism() {
            return Err(Error::NotEndomorphism);
        }
        let mut acc = Morphism::identity(&self.domain);
        for _ in 0..k {
            acc = compose(self, &acc)?.morphism;
        }
        Ok(acc)
    }

    /// Relabels through an alphabet with the same number of letters, keeping
    /// letter indices.
    pub fn with_alphabets(&self, domain: Alphabet, codomain: Alphabet) -> Result<Morphism> {
        if domain.len() != self.domain.len() || codomain.len() != self.codomain.len() {
            return Err(Error::AlphabetMismatch);
        }
        Morphism::new(domain, codomain, self.images.clone())
    }

    /// Boolean incidence matrix: `m[a][b]` iff `b` occurs in the image of `a`.
    fn incidence(&self) -> Vec<LetterSet> {
        self.images.iter().map(|w| w.iter().copied().collect()).collect()
    }

    pub fn is_primitive(&self) -> Result<bool> {
        if !self.is_endomorphism() {
            return Err(Error::NotEndomorphism);
        }
        let d = self.domain.len();
        let m = self.incidence();
        let full = self.domain.full();
        let mut p = m.clone();
        for _ in 0..d * d {
            if p.iter().all(|&row| row == full) {
                return Ok(true);
            }
            p = p
                .iter()
                .map(|row| row.iter().fold(LetterSet::EMPTY, |acc, b| acc.union(m[b.index()])))
                .collect();
        }
        Ok(p.iter().all(|&row| row == full))
    }

    /// Letters whose iterated images have unbounded length.
    pub fn growing_letters(&self) -> Result<LetterSet> {
        if !self.is_endomorphism() {
            return Err(Error::NotEndomorphism);
        }
        let m = self.incidence();
        // reach[a]: letters reachable from a in at least one step
        let mut reach = m.clone();
        loop {
            let next: Vec<LetterSet> = reach
                .iter()
                .map(|r| r.iter().fold(*r, |acc, b| acc.union(m[b.index()])))
                .collect();
            if next == reach {
                break;
            }
            reach = next;
        }
        let letters: Vec<Letter> = self.domain.letters().collect();
        let cyclic = |v: Letter| reach[v.index()].contains(v);
        let scc = |v: Letter| -> LetterSet {
            letters.iter().copied().filter(|&u| u == v || (reach[v.index()].contains(u) && reach[u.index()].contains(v))).collect()
        };
        let mut heavy = LetterSet::EMPTY;
        for &v in &letters {
            if !cyclic(v) {
                continue;
            }
            let comp = scc(v);
            let inner_edges: usize = comp
                .iter()
                .map(|u| self.images[u.index()].iter().filter(|l| comp.contains(**l)).count())
                .sum();
            let chained = letters
                .iter()
                .any(|&w| cyclic(w) && !comp.contains(w) && reach[v.index()].contains(w));
            if inner_edges > comp.len() || chained {
                heavy.insert(v);
            }
        }
        Ok(letters
            .iter()
            .copied()
            .filter(|&a| heavy.contains(a) || reach[a.index()].intersection(heavy) != LetterSet::EMPTY)
            .collect())
    }

    /// `(k, b)` with `σ^k(b)` starting with `b`, scanning from the smallest
    /// growing letter.
    pub fn prolongable_power(&self) -> Result<(usize, Letter)> {
        let g = self.growing_letters()?;
        let a = g.first().ok_or(Error::NoGrowingLetter)?;
        self.prolongable_power_from(a)
    }

    /// Follows `a_n`, the first growing letter of `σ^n(a)`, until a letter
    /// repeats: `a_k = a_l` gives power `l - k` and letter `a_k`.
    pub fn prolongable_power_from(&self, a: Letter) -> Result<(usize, Letter)> {
        let g = self.growing_letters()?;
        if !g.contains(a) {
            return Err(Error::NoGrowingLetter);
        }
        let bounded = self.domain.full().difference(g);
        let mut seen: Vec<Letter> = vec![a];
        let mut cur = a;
        loop {
            let img = &self.images[cur.index()];
            let next = *img.iter().find(|l| !bounded.contains(**l)).ok_or(Error::NoGrowingLetter)?;
            if let Some(k) = seen.iter().position(|&l| l == next) {
                return Ok((seen.len() - k, next));
            }
            seen.push(next);
            cur = next;
        }
    }
}

/// `result(a) = outer(inner(a))`.
pub fn compose(outer: &Morphism, inner: &Morphism) -> Result<Composition> {
    if inner.codomain != outer.domain {
        return Err(Error::AlphabetMismatch);
    }
    let raw: Vec<Word> = inner.images.iter().map(|w| outer.apply(w)).collect::<Result<_>>()?;
    let used: LetterSet = raw.iter().flat_map(|w| w.iter().copied()).collect();
    if used == outer.codomain.full() {
        let morphism = Morphism { domain: inner.domain.clone(), codomain: outer.codomain.clone(), images: raw };
        return Ok(Composition { morphism, codomain_shrunk: false });
    }
    let kept: Vec<Letter> = used.iter().collect();
    let codomain = Alphabet::new(kept.iter().map(|&l| outer.codomain.symbol(l)))?;
    let mut remap = vec![Letter(0); outer.codomain.len()];
    for (i, &l) in kept.iter().enumerate() {
        remap[l.index()] = Letter(i as u8);
    }
    let images = raw.into_iter().map(|w| w.iter().map(|l| remap[l.index()]).collect()).collect();
    let morphism = Morphism { domain: inner.domain.clone(), codomain, images };
    Ok(Composition { morphism, codomain_shrunk: true })
}

/// Composes a list left to right as written: `[f, g, h]` gives `f∘g∘h`.
pub fn compose_all(ms: &[&Morphism]) -> Result<Morphism> {
    let (last, rest) = ms.split_last().ok_or_else(|| Error::Invalid("empty composition".into()))?;
    let mut acc = (*last).clone();
    for m in rest.iter().rev() {
        acc = compose(m, &acc)?.morphism;
    }
    Ok(acc)
}

/// Elementary morphisms of the free group automorphism generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Elementary {
    /// `a -> ba`, written `L_ab`.
    Left(Letter, Letter),
    /// `a -> ab`, written `R_ab`.
    Right(Letter, Letter),
}

pub fn elementary(alphabet: &Alphabet, kind: Elementary) -> Result<Morphism> {
    let (a, b) = match kind {
        Elementary::Left(a, b) | Elementary::Right(a, b) => (a, b),
    };
    if a == b {
        return Err(Error::SameLetter);
    }
    if !alphabet.contains(a) || !alphabet.contains(b) {
        return Err(Error::LetterNotInDomain(format!("{} or {}", a.0, b.0)));
    }
    let mut images: Vec<Word> = alphabet.letters().map(Word::letter).collect();
    images[a.index()] = match kind {
        Elementary::Left(..) => Word(vec![b, a]),
        Elementary::Right(..) => Word(vec![a, b]),
    };
    Morphism::new(alphabet.clone(), alphabet.clone(), images)
}

impl fmt::Display for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.domain.letters().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}↦{}", self.domain.symbol(a), self.codomain.render(&self.images[a.index()]))?;
        }
        Ok(())
    }
}

/// Text form: one `a -> word` rule per line.
pub fn morphism_to_text(m: &Morphism) -> String {
    let mut s = String::new();
    for a in m.domain.letters() {
        s.push_str(&format!("{} -> {}\n", m.domain.symbol(a), m.codomain.render(m.image(a))));
    }
    s
}
