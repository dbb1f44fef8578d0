//! Return morphisms, antecedents, return words and derived sequences.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::language::{extension_table, extensions, FiniteLanguage, Language, MorphicSpec, Shift};
use crate::words::{compose_all, occurrences, Alphabet, Letter, LetterSet, Morphism, Word};

/// A morphism `σ` together with the longest non-empty `w` such that every
/// `σ(a)w` contains `w` exactly twice, as a prefix and as a suffix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReturnMorphism {
    morphism: Morphism,
    word: Word,
    shortest: usize,
}

/// `true` iff `σ` is a return morphism for `w`.
pub fn is_return_for(sigma: &Morphism, w: &[Letter]) -> bool {
    !w.is_empty()
        && sigma.images().iter().all(|img| {
            let full = [img.as_ref(), w].concat();
            occurrences(w, &full) == [0, img.len()]
        })
}

pub fn recognize_return_morphism(sigma: &Morphism) -> Result<Option<ReturnMorphism>> {
    ReturnMorphism::recognize(sigma)
}

impl ReturnMorphism {
    pub fn recognize(sigma: &Morphism) -> Result<Option<ReturnMorphism>> {
        if !sigma.is_injective_on_letters() {
            return Err(Error::NotInjective);
        }
        let imgs = sigma.images();
        // Past |σ(a)| + |σ(b)| a common prefix of σ(a)^ω and σ(b)^ω is infinite
        // (Fine and Wilf), so longer candidates need not be tried.
        let cap = if imgs.len() < 2 {
            2 * imgs.first().map_or(0, |w| w.len())
        } else {
            let mut lens: Vec<usize> = imgs.iter().map(|w| w.len()).collect();
            lens.sort_unstable_by(|a, b| b.cmp(a));
            lens[0] + lens[1]
        };
        let periodic = |w: &Word, i: usize| w[i % w.len()];
        let mut common = 0;
        while common < cap && imgs.iter().all(|w| periodic(w, common) == periodic(&imgs[0], common)) {
            common += 1;
        }
        let candidate: Vec<Letter> = (0..common).map(|i| periodic(&imgs[0], i)).collect();
        let valid: Vec<usize> = (1..=common).filter(|&l| is_return_for(sigma, &candidate[..l])).collect();
        match (valid.first(), valid.last()) {
            (Some(&lo), Some(&hi)) => Ok(Some(ReturnMorphism {
                morphism: sigma.clone(),
                word: Word::from(&candidate[..hi]),
                shortest: lo,
            })),
            _ => Ok(None),
        }
    }

    /// All lengths `l` such that the length-`l` prefix of the maximal word works.
    pub fn valid_lengths(&self) -> std::ops::RangeInclusive<usize> {
        self.shortest..=self.word.len()
    }

    pub fn morphism(&self) -> &Morphism {
        &self.morphism
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn domain(&self) -> &Alphabet {
        self.morphism.domain()
    }

    pub fn codomain(&self) -> &Alphabet {
        self.morphism.codomain()
    }

    /// `σ(a)w`.
    pub fn extended_image(&self, a: Letter) -> Word {
        self.morphism.image(a).concat(&self.word)
    }

    /// `𝓛(σ)`: factors of the words `σ(a)w`.
    pub fn language(&self) -> FiniteLanguage {
        FiniteLanguage::new(self.codomain().clone(), self.domain().letters().map(|a| self.extended_image(a)).collect())
    }

    /// Factors of the words `σ(a)w` without any occurrence of `w`.
    pub fn initial_factors(&self) -> BTreeSet<Word> {
        let lang = self.language();
        let mut out = BTreeSet::new();
        for n in 0..=lang.max_len() {
            let fs = lang.factors(n).expect("finite language");
            let before = out.len();
            out.extend(fs.iter().filter(|f| occurrences(&self.word, f).is_empty()).cloned());
            if n >= self.word.len() && out.len() == before {
                break;
            }
        }
        out
    }

    /// Every initial factor has a tree as extension graph in `𝓛(σ)`.
    pub fn dendric_check(&self) -> DendricCheck {
        let lang = self.language();
        let initial = self.initial_factors();
        let max = initial.iter().map(|w| w.len()).max().unwrap_or(0);
        for n in 0..=max {
            let table = extension_table(&lang, n).expect("finite language");
            for (w, e) in table {
                if initial.contains(&w) && !e.graph().is_tree() {
                    return DendricCheck { dendric: false, witness: Some(w) };
                }
            }
        }
        DendricCheck { dendric: true, witness: None }
    }

    pub fn is_dendric(&self) -> bool {
        self.dendric_check().dendric
    }

    /// `{a | σ(a) ∈ 𝒜⁺s}`.
    pub fn left_domain(&self, s: &[Letter]) -> LetterSet {
        self.domain()
            .letters()
            .filter(|&a| {
                let img = self.morphism.image(a);
                img.len() > s.len() && img.ends_with(s)
            })
            .collect()
    }

    /// `{a | σ(a)w ∈ p𝒜⁺}`.
    pub fn right_domain(&self, p: &[Letter]) -> LetterSet {
        self.domain()
            .letters()
            .filter(|&a| {
                let img = self.extended_image(a);
                img.len() > p.len() && img.starts_with(p)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DendricCheck {
    pub dendric: bool,
    pub witness: Option<Word>,
}

/// Decomposition `u = sσ(v)p` of a factor of `σ·X`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Antecedent {
    /// `u` contains no occurrence of `w`.
    Initial,
    Found { s: Word, v: Word, p: Word },
}

/// Cuts `u` at the occurrences of `w`; the blocks between consecutive
/// occurrences spell `σ(v)`.
pub fn antecedent(rho: &ReturnMorphism, x: &dyn Language, u: &[Letter]) -> Result<Antecedent> {
    let w = rho.word();
    let occ = occurrences(w, u);
    let (Some(&first), Some(&last)) = (occ.first(), occ.last()) else {
        return Ok(Antecedent::Initial);
    };
    let show = || rho.codomain().show(u);
    let by_image: BTreeMap<&[Letter], Letter> =
        rho.domain().letters().map(|a| (rho.morphism().image(a).as_ref(), a)).collect();
    let mut v = Word::empty();
    for pair in occ.windows(2) {
        let block = &u[pair[0]..pair[1]];
        v.push(*by_image.get(block).ok_or_else(|| Error::NotAFactor(show()))?);
    }
    let (s, p) = (Word::from(&u[..first]), Word::from(&u[last..]));
    if !x.contains(&v)? {
        return Err(Error::NotAFactor(show()));
    }
    let e = extensions(x, &v)?;
    let (ls, rs) = (rho.left_domain(&s), rho.right_domain(&p));
    if !e.bi.iter().any(|&(a, b)| ls.contains(a) && rs.contains(b)) {
        return Err(Error::NotAFactor(show()));
    }
    Ok(Antecedent::Found { s, v, p })
}

const MAX_RETURN_LEN: usize = 1 << 16;
const MAX_SCAN: usize = 1 << 24;

/// Return words to `w` in first-occurrence order along `x`.
///
/// The set is enumerated exactly by extending `w` letter by letter inside
/// the language; the order comes from scanning a prefix of `x`.
pub fn return_words(shift: &Shift, w: &[Letter]) -> Result<Vec<Word>> {
    if w.is_empty() {
        return Err(Error::Invalid("return words need a non-empty word".into()));
    }
    if !shift.contains(w)? {
        return Err(Error::NotAFactor(shift.alphabet().show(w)));
    }
    let alphabet: Vec<Letter> = shift.alphabet().letters().collect();
    let mut found: BTreeSet<Word> = BTreeSet::new();
    let mut stack: Vec<Word> = vec![Word::from(w)];
    while let Some(cur) = stack.pop() {
        shift.cancel_token().check()?;
        if cur.len() > MAX_RETURN_LEN {
            return Err(Error::DerivationInconclusive("return word longer than search limit".into()));
        }
        for &a in &alphabet {
            let mut next = cur.clone();
            next.push(a);
            if !shift.contains(&next)? {
                continue;
            }
            if next.ends_with(w) {
                found.insert(Word::from(&next[..next.len() - w.len()]));
            } else {
                stack.push(next);
            }
        }
    }
    let mut order: Vec<Word> = Vec::with_capacity(found.len());
    let mut len = 256;
    while order.len() < found.len() {
        if len > MAX_SCAN {
            return Err(Error::DerivationInconclusive("return words not all seen in the scanned prefix".into()));
        }
        order.clear();
        let x = shift.spec().prefix(len);
        let occ = occurrences(w, &x);
        for pair in occ.windows(2) {
            let r = Word::from(&x[pair[0]..pair[1]]);
            if !found.contains(&r) {
                return Err(Error::DerivationInconclusive("scan found an unexpected return word".into()));
            }
            if !order.contains(&r) {
                order.push(r);
            }
        }
        len *= 4;
    }
    Ok(order)
}

/// Parses `z` as a concatenation of return words to `marker`, where `z·marker`
/// starts with `marker`. Letter `i` of the result is the index of the
/// `i`-th block in `returns`.
fn decode(z: &[Letter], marker: &[Letter], returns: &[Word]) -> Option<Word> {
    let t = [z, marker].concat();
    let occ = occurrences(marker, &t);
    if occ.first() != Some(&0) || occ.last() != Some(&z.len()) {
        return None;
    }
    occ.windows(2)
        .map(|p| returns.iter().position(|r| r.as_ref() == &t[p[0]..p[1]]).map(|i| Letter(i as u8)))
        .collect()
}

fn coding_morphism(returns: &[Word], codomain: &Alphabet) -> Result<Morphism> {
    if returns.len() > crate::words::MAX_ALPHABET - 1 {
        return Err(Error::DerivationInconclusive("too many return words".into()));
    }
    Morphism::new(Alphabet::canonical(returns.len()), codomain.clone(), returns.to_vec())
}

/// One derivation step: `x = θ_u(D_u(x))`.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub returns: Vec<Word>,
    /// `θ_u`, sending letter `i` to the `i`-th return word.
    pub theta: Morphism,
    pub derived: MorphicSpec,
}

const CHECK_LEN: usize = 50;

/// Derives `x` with respect to its prefix `u`.
///
/// With `x = τ(y)` and `y` the fixed point, let `v` be the shortest prefix of
/// `y` with `|τ(v)| ≥ |u|`. Then `D_v(y)` is the fixed point of the induced
/// substitution on return words to `v`, and `D_u(x) = ψ(D_v(y))` where `ψ`
/// decodes `τ(r)` over return words to `u`.
pub fn derive(shift: &Shift, u: &[Letter]) -> Result<Derivation> {
    let spec = shift.spec();
    if u.is_empty() || spec.prefix(u.len()).as_ref() != u {
        return Err(Error::Invalid("derivation needs a non-empty prefix".into()));
    }
    let returns = return_words(shift, u)?;
    let theta = coding_morphism(&returns, shift.alphabet())?;

    let pure = Shift::new(spec.pure_part())?.with_cancel(shift.cancel_token().clone());
    let outer = spec.outer();
    let mut v_len = 1;
    while outer.apply(&spec.pure_prefix(v_len))?.len() < u.len() {
        v_len += 1;
    }
    let v = spec.pure_prefix(v_len);
    let y_returns = return_words(&pure, &v)?;
    let step = spec.inner().power(spec.power())?;
    let k = y_returns.len();
    let fail = |what: &str| Error::DerivationInconclusive(format!("{what} does not decode over return words"));
    let induced_images = y_returns
        .iter()
        .map(|r| decode(&step.apply(r)?, &v, &y_returns).ok_or_else(|| fail("σ(r)")))
        .collect::<Result<Vec<Word>>>()?;
    let induced = Morphism::new(Alphabet::canonical(k), Alphabet::canonical(k), induced_images)?;
    let psi_images = y_returns
        .iter()
        .map(|r| decode(&outer.apply(r)?, u, &returns).ok_or_else(|| fail("τ(r)")))
        .collect::<Result<Vec<Word>>>()?;
    let psi = Morphism::new(Alphabet::canonical(k), Alphabet::canonical(returns.len()), psi_images)?;
    let psi = if psi.is_endomorphism() && psi == Morphism::identity(psi.domain()) { None } else { Some(psi) };
    let derived = MorphicSpec::new(induced, psi, Letter(0))?;
    if derived.seed() != Letter(0) || derived.power() != 1 {
        return Err(Error::DerivationInconclusive("induced substitution is not prolongable on 1".into()));
    }
    let image = theta.apply(&derived.prefix(CHECK_LEN))?;
    if spec.prefix(image.len()) != image {
        return Err(Error::DerivationInconclusive("θ_u(derived) is not a prefix of x".into()));
    }
    Ok(Derivation { returns, theta, derived })
}

/// `x = λ(θ^ω(1))` with `λ` and `θ` return morphisms.
#[derive(Clone, Debug)]
pub struct ReturnRepresentation {
    pub lambda: ReturnMorphism,
    pub theta: ReturnMorphism,
    /// First repeated level and its repetition: `x^(m) = x^(n)`.
    pub m: usize,
    pub n: usize,
    pub verified_prefix_length: usize,
}

pub const DEFAULT_CHAIN_BUDGET: usize = 64;
const MAX_COMPOSED: u64 = 1 << 22;
const VERIFY_DEPTH: usize = 8;
const VERIFY_CAP: usize = 1 << 20;

/// Derives repeatedly by the first letter until a derived sequence repeats.
/// Levels are compared by their defining substitution pair.
pub fn return_representation(shift: &Shift, budget: usize) -> Result<ReturnRepresentation> {
    let mut levels: Vec<MorphicSpec> = vec![shift.spec().clone()];
    let mut thetas: Vec<Morphism> = Vec::new();
    let mut current = Shift::new(shift.spec().clone())?.with_cancel(shift.cancel_token().clone());
    for i in 0..budget {
        let first = current.spec().prefix(1);
        let d = derive(&current, &first)?;
        thetas.push(d.theta);
        if let Some(m) = (1..=i).find(|&j| levels[j] == d.derived) {
            let n = i + 1;
            let refs = |r: std::ops::Range<usize>| thetas[r].iter().collect::<Vec<_>>();
            for r in [0..m, m..n] {
                if composed_size(&refs(r)) > MAX_COMPOSED {
                    return Err(Error::DerivationInconclusive("λ or θ would be too large to write down".into()));
                }
            }
            let lambda = compose_all(&refs(0..m))?;
            let theta = compose_all(&refs(m..n))?;
            let recognize = |mor: &Morphism, name: &str| {
                ReturnMorphism::recognize(mor)?.ok_or_else(|| {
                    Error::DerivationInconclusive(format!("{name} is not a return morphism"))
                })
            };
            let lambda = recognize(&lambda, "λ")?;
            let theta = recognize(&theta, "θ")?;
            let verified_prefix_length = verify(shift.spec(), &lambda, &theta)?;
            return Ok(ReturnRepresentation { lambda, theta, m, n, verified_prefix_length });
        }
        levels.push(d.derived.clone());
        current = Shift::new(d.derived)?.with_cancel(shift.cancel_token().clone());
    }
    Err(Error::ChainBudgetExceeded(budget))
}

/// Total image length of `f∘g∘...`, saturating.
fn composed_size(list: &[&Morphism]) -> u64 {
    if list.is_empty() {
        return 0;
    }
    // lengths[b] = |f∘...(b)| for letters b of the current inner domain
    let mut lengths: Vec<u64> = list[0].images().iter().map(|w| w.len() as u64).collect();
    for m in &list[1..] {
        lengths = m.images().iter().map(|w| w.iter().fold(0u64, |acc, b| acc.saturating_add(lengths[b.index()]))).collect();
    }
    lengths.iter().fold(0u64, |acc, &l| acc.saturating_add(l))
}

/// Checks that `λ(θ^k(1))` is a prefix of `x` for every `k ≤ 8`.
fn verify(spec: &MorphicSpec, lambda: &ReturnMorphism, theta: &ReturnMorphism) -> Result<usize> {
    let mut w = Word::letter(Letter(0));
    let mut checked = 0;
    for _ in 0..=VERIFY_DEPTH {
        let image = lambda.morphism().apply_prefix(&w, VERIFY_CAP);
        if spec.prefix(image.len()) != image {
            return Err(Error::DerivationInconclusive("λ(θ^k(1)) is not a prefix of x".into()));
        }
        checked = checked.max(image.len());
        w = theta.morphism().apply_prefix(&w, VERIFY_CAP);
    }
    Ok(checked)
}
