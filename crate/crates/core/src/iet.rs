//! Planarity, order transfer through return morphisms, and the decision of
//! whether a dendric shift is generated by an interval exchange.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use rayon::prelude::*;

use crate::cliques::{phi, tau, MultiClique};
use crate::decide::{classify, valid_triplet, ClassifyOptions, Verdict};
use crate::error::{Error, Result};
use crate::language::{extension_table, extensions, ExtensionData, Language, Shift};
use crate::returns::ReturnMorphism;
use crate::sadic_graph::{permutations, Edge};
use crate::words::{Alphabet, Letter, LetterSet, Word};
use crate::Side;

/// Total order on an alphabet, listed from smallest to largest.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TotalOrder(Vec<Letter>);

impl TotalOrder {
    pub fn new(order: Vec<Letter>) -> Result<Self> {
        let set: LetterSet = order.iter().copied().collect();
        if set.len() != order.len() {
            return Err(Error::Invalid("repeated letter in order".into()));
        }
        Ok(TotalOrder(order))
    }

    /// Parses `"3<0<2<1"` or `"3021"`.
    pub fn parse(alphabet: &Alphabet, s: &str) -> Result<Self> {
        let w = alphabet.word(&s.replace('<', ""))?;
        if w.len() != alphabet.len() {
            return Err(Error::Invalid(format!("order {s:?} does not list every letter")));
        }
        TotalOrder::new(w.into_vec())
    }

    pub fn natural(d: usize) -> Self {
        TotalOrder((0..d).map(|i| Letter(i as u8)).collect())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn rank(&self, l: Letter) -> usize {
        self.0.iter().position(|&x| x == l).expect("letter in order")
    }

    pub fn reversed(&self) -> Self {
        TotalOrder(self.0.iter().rev().copied().collect())
    }

    /// The `k` smallest letters.
    pub fn bottom(&self, k: usize) -> LetterSet {
        self.0[..k].iter().copied().collect()
    }

    pub fn relabel(&self, perm: &[Letter]) -> Self {
        TotalOrder(self.0.iter().map(|l| perm[l.index()]).collect())
    }

    pub fn render(&self, alphabet: &Alphabet) -> String {
        self.0.iter().map(|&l| alphabet.symbol(l).to_string()).join("<")
    }
}

/// `(≤^L, ≤^R)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderPair {
    pub left: TotalOrder,
    pub right: TotalOrder,
}

impl OrderPair {
    pub fn new(left: TotalOrder, right: TotalOrder) -> Self {
        OrderPair { left, right }
    }

    /// No `0 < k < d` with the same `k` smallest letters on both sides.
    pub fn is_irreducible(&self) -> bool {
        let d = self.left.0.len();
        (1..d).all(|k| self.left.bottom(k) != self.right.bottom(k))
    }

    pub fn reversed(&self) -> Self {
        OrderPair { left: self.left.reversed(), right: self.right.reversed() }
    }

    /// Picks, between the pair and its reversal, the one with the smallest
    /// letter before the second smallest in the left order.
    pub fn normalized(&self) -> Self {
        if self.left.0.len() < 2 || self.left.rank(Letter(0)) < self.left.rank(Letter(1)) {
            self.clone()
        } else {
            self.reversed()
        }
    }

    pub fn relabel(&self, perm: &[Letter]) -> Self {
        OrderPair { left: self.left.relabel(perm), right: self.right.relabel(perm) }
    }

    /// Two permutation lines: top row `≤^R`, bottom row `≤^L`.
    pub fn render(&self, alphabet: &Alphabet) -> String {
        let row = |o: &TotalOrder| o.0.iter().map(|&l| alphabet.symbol(l).to_string()).join(" ");
        format!("{}\n{}", row(&self.right), row(&self.left))
    }
}

impl fmt::Display for OrderPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |o: &TotalOrder| o.0.iter().map(|l| l.0.to_string()).join("<");
        write!(f, "({}, {})", row(&self.left), row(&self.right))
    }
}

/// Every pair of bi-extensions is ordered the same way on both sides.
pub fn graph_planar(e: &ExtensionData, pair: &OrderPair) -> bool {
    let bi: Vec<(Letter, Letter)> = e.bi.iter().copied().collect();
    bi.iter().all(|&(a1, b1)| {
        bi.iter().all(|&(a2, b2)| {
            pair.left.rank(a1) >= pair.left.rank(a2) || pair.right.rank(b1) <= pair.right.rank(b2)
        })
    })
}

pub fn factor_planar(lang: &dyn Language, w: &[Letter], pair: &OrderPair) -> Result<bool> {
    Ok(graph_planar(&extensions(lang, w)?, pair))
}

/// Every initial factor is planar in `𝓛(σ)`.
pub fn morphism_planar(rho: &ReturnMorphism, pair: &OrderPair) -> bool {
    let lang = rho.language();
    let initial = rho.initial_factors();
    let max = initial.iter().map(|w| w.len()).max().unwrap_or(0);
    (0..=max).all(|n| {
        extension_table(&lang, n)
            .expect("finite language")
            .iter()
            .filter(|(w, _)| initial.contains(*w))
            .all(|(_, e)| graph_planar(e, pair))
    })
}

/// The unique order `⪯` on the domain such that every `φ_s` (left) or
/// `φ_p` (right) is order preserving from `⪯` to `target`.
///
/// Letters are merged recursively over the suffixes `s` of the images (or
/// the prefixes of the extended images): inside `B_s`, letters are grouped
/// by the letter just before `s` and groups follow `target`.
pub fn transfer_order(side: Side, rho: &ReturnMorphism, target: &TotalOrder) -> TotalOrder {
    let words: Vec<Word> = rho
        .domain()
        .letters()
        .map(|a| match side {
            Side::Left => Word(rho.morphism().image(a).iter().rev().copied().collect()),
            Side::Right => rho.extended_image(a),
        })
        .collect();
    fn merge(words: &[Word], depth: usize, set: Vec<Letter>, target: &TotalOrder, out: &mut Vec<Letter>) {
        if set.len() <= 1 {
            out.extend(set);
            return;
        }
        let mut groups: BTreeMap<usize, Vec<Letter>> = BTreeMap::new();
        let mut exhausted = Vec::new();
        for a in set {
            match words[a.index()].get(depth) {
                Some(&x) => groups.entry(target.rank(x)).or_default().push(a),
                None => exhausted.push(a),
            }
        }
        out.extend(exhausted);
        for (_, g) in groups {
            merge(words, depth + 1, g, target, out);
        }
    }
    let mut out = Vec::new();
    merge(&words, 0, rho.domain().letters().collect(), target, &mut out);
    TotalOrder(out)
}

/// Checks directly that every `φ_s`, `s ∈ 𝒯`, is order preserving.
pub fn order_preserving(side: Side, rho: &ReturnMorphism, from: &TotalOrder, to: &TotalOrder) -> bool {
    tau(side, rho).iter().all(|x| {
        let f = phi(side, rho, x);
        let dom: Vec<Letter> = f.domain.iter().collect();
        dom.iter().all(|&a| {
            dom.iter().all(|&b| from.rank(a) >= from.rank(b) || to.rank(f.get(a).unwrap()) <= to.rank(f.get(b).unwrap()))
        })
    })
}

/// Left and right order preserving from `from` (domain) to `to` (codomain).
pub fn planar_preserving(rho: &ReturnMorphism, from: &OrderPair, to: &OrderPair) -> bool {
    order_preserving(Side::Left, rho, &from.left, &to.left) && order_preserving(Side::Right, rho, &from.right, &to.right)
}

/// Path through the letters in order.
pub fn line_graph(alphabet: &Alphabet, order: &TotalOrder) -> MultiClique {
    MultiClique::new(alphabet.clone(), order.0.windows(2).map(|p| p.iter().copied().collect())).unwrap()
}

/// Edge from `from` (orders on the codomain) to `to` (orders on the domain).
pub fn iet_edge(rho: &ReturnMorphism, from: &OrderPair, to: &OrderPair) -> Result<bool> {
    if !from.is_irreducible() || !to.is_irreducible() {
        return Ok(false);
    }
    let (dom, cod) = (rho.domain(), rho.codomain());
    let ok = valid_triplet(Side::Left, &line_graph(cod, &from.left), rho, &line_graph(dom, &to.left))?.valid
        && valid_triplet(Side::Right, &line_graph(cod, &from.right), rho, &line_graph(dom, &to.right))?.valid
        && morphism_planar(rho, from)
        && (planar_preserving(rho, to, from) || planar_preserving(rho, &to.reversed(), from));
    Ok(ok)
}

/// Normalised irreducible order pairs on `d` letters, in sorted order.
pub fn irreducible_pairs(d: usize) -> Vec<OrderPair> {
    let orders: Vec<TotalOrder> = permutations(d).into_iter().map(TotalOrder).collect();
    let mut out: Vec<OrderPair> = orders
        .iter()
        .cartesian_product(orders.iter())
        .map(|(l, r)| OrderPair::new(l.clone(), r.clone()))
        .filter(|p| p.is_irreducible() && p.normalized() == *p)
        .collect();
    out.sort();
    out
}

fn transfer_pair(rho: &ReturnMorphism, pair: &OrderPair) -> OrderPair {
    OrderPair::new(transfer_order(Side::Left, rho, &pair.left), transfer_order(Side::Right, rho, &pair.right))
        .normalized()
}

/// For a dendric shift `x = λ(θ^ω(1))`, the first start pair (in sorted
/// order) from which `λ, θ, θ, ...` labels a path of the interval exchange
/// graph, or `None`.
pub fn decide_iet(shift: &Shift) -> Result<Option<OrderPair>> {
    let c = classify(shift, ClassifyOptions::default())?;
    if c.verdict != Verdict::Dendric {
        return Err(Error::NotDendricInput);
    }
    let rep = c.representation.expect("dendric verdicts carry a representation");
    let (lambda, theta) = (rep.lambda, rep.theta);
    let d = shift.alphabet().len();
    let found = irreducible_pairs(d).into_par_iter().find_first(|start| follows(&lambda, &theta, start).unwrap_or(false));
    Ok(found)
}

fn follows(lambda: &ReturnMorphism, theta: &ReturnMorphism, start: &OrderPair) -> Result<bool> {
    let mut cur = transfer_pair(lambda, start);
    if !iet_edge(lambda, start, &cur)? {
        return Ok(false);
    }
    let mut seen = BTreeSet::new();
    while seen.insert(cur.clone()) {
        let next = transfer_pair(theta, &cur);
        if !iet_edge(theta, &cur, &next)? {
            return Ok(false);
        }
        cur = next;
    }
    Ok(true)
}

#[derive(Clone, Debug)]
pub struct IetGraph {
    pub alphabet: Alphabet,
    pub vertices: Vec<OrderPair>,
    pub morphisms: Vec<ReturnMorphism>,
    pub edges: Vec<Edge>,
}

pub fn build_iet_graph(set: &[ReturnMorphism]) -> Result<IetGraph> {
    let alphabet = set.first().ok_or_else(|| Error::Invalid("empty morphism set".into()))?.domain().clone();
    if set.iter().any(|r| r.domain() != &alphabet || r.codomain() != &alphabet) {
        return Err(Error::NotEndomorphism);
    }
    let vertices = irreducible_pairs(alphabet.len());
    let index: BTreeMap<&OrderPair, usize> = vertices.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut edges: Vec<Edge> = (0..vertices.len())
        .into_par_iter()
        .flat_map_iter(|from| {
            let (vertices, index) = (&vertices, &index);
            set.iter().enumerate().filter_map(move |(k, rho)| {
                let to = transfer_pair(rho, &vertices[from]);
                iet_edge(rho, &vertices[from], &to).ok()?.then(|| Edge { from, to: index[&to], morphism: k })
            })
        })
        .collect();
    edges.sort();
    Ok(IetGraph { alphabet, vertices, morphisms: set.to_vec(), edges })
}

impl IetGraph {
    pub fn to_dot(&self, names: &[String]) -> String {
        let mut s = String::from("digraph IET {\n");
        for (i, v) in self.vertices.iter().enumerate() {
            s.push_str(&format!(
                "  v{i} [label=\"{} / {}\"];\n",
                v.right.render(&self.alphabet),
                v.left.render(&self.alphabet)
            ));
        }
        for e in &self.edges {
            let name = names.get(e.morphism).cloned().unwrap_or_else(|| format!("m{}", e.morphism));
            s.push_str(&format!("  v{} -> v{} [label=\"{name}\"];\n", e.from, e.to));
        }
        s.push_str("}\n");
        s
    }

    /// Vertex classes under relabelling and reversal.
    pub fn quotient_classes(&self) -> Vec<Vec<usize>> {
        let perms = permutations(self.alphabet.len());
        let mut classes: BTreeMap<OrderPair, Vec<usize>> = BTreeMap::new();
        for (i, v) in self.vertices.iter().enumerate() {
            let rep = perms.iter().map(|pi| v.relabel(pi).normalized()).min().unwrap();
            classes.entry(rep).or_default().push(i);
        }
        classes.into_values().collect()
    }
}

/// Number of irreducible order pairs on `d` letters up to relabelling and reversal.
pub fn iet_class_count(d: usize) -> usize {
    let perms = permutations(d);
    irreducible_pairs(d)
        .iter()
        .map(|v| perms.iter().map(|pi| v.relabel(pi).normalized()).min().unwrap())
        .collect::<BTreeSet<_>>()
        .len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cliques::recognize;
    use crate::language::MorphicSpec;
    use crate::words::Morphism;

    fn rm(s: &str) -> ReturnMorphism {
        recognize(&Morphism::parse_inline(s).unwrap()).unwrap()
    }

    fn shift(s: &str) -> Shift {
        Shift::new(MorphicSpec::pure(Morphism::parse_inline(s).unwrap(), Letter(0)).unwrap()).unwrap()
    }

    fn pair(a: &Alphabet, l: &str, r: &str) -> OrderPair {
        OrderPair::new(TotalOrder::parse(a, l).unwrap(), TotalOrder::parse(a, r).unwrap())
    }

    #[test]
    fn planarity() {
        let fib = shift("0>01 1>0");
        let a = fib.alphabet().clone();
        assert!(factor_planar(&fib, &[], &pair(&a, "0<1", "1<0")).unwrap());
        assert!(!factor_planar(&fib, &[], &pair(&a, "0<1", "0<1")).unwrap());
        let tm = shift("0>01 1>10");
        assert!(!factor_planar(&tm, &[], &pair(&a, "0<1", "1<0")).unwrap());
        assert!(!factor_planar(&tm, &[], &pair(&a, "0<1", "0<1")).unwrap());
    }

    #[test]
    fn transfers() {
        let beta = rm("0>0 1>01 2>02 3>032");
        let a = beta.domain().clone();
        let t = transfer_order(Side::Left, &beta, &TotalOrder::parse(&a, "3<0<2<1").unwrap());
        assert_eq!(t, TotalOrder::parse(&a, "0<3<2<1").unwrap());
        let fib = rm("0>01 1>0");
        let b = fib.domain().clone();
        assert_eq!(transfer_order(Side::Left, &fib, &TotalOrder::natural(2)), TotalOrder::parse(&b, "1<0").unwrap());
        let alpha = rm("0>0 1>01 2>02 3>03");
        let o = TotalOrder::parse(&a, "2<0<3<1").unwrap();
        assert_eq!(transfer_order(Side::Left, &alpha, &o), o);
    }

    #[test]
    fn fibonacci_edge() {
        let fib = rm("0>01 1>0");
        let a = fib.domain().clone();
        let p = pair(&a, "0<1", "1<0");
        assert!(iet_edge(&fib, &p, &p).unwrap());
        assert!(!iet_edge(&fib, &p, &pair(&a, "0<1", "0<1")).unwrap());
    }

    #[test]
    fn class_counts() {
        assert_eq!(irreducible_pairs(2).len(), 1);
        assert_eq!(iet_class_count(3), 2);
        assert_eq!(iet_class_count(4), 9);
    }

    #[test]
    fn decisions() {
        let a = Alphabet::digits(2);
        assert_eq!(decide_iet(&shift("0>01 1>0")).unwrap(), Some(pair(&a, "0<1", "1<0")));
        assert_eq!(decide_iet(&shift("0>01 1>02 2>0")).unwrap(), None);
        assert_eq!(decide_iet(&shift("0>01 1>10")), Err(Error::NotDendricInput));
    }
}
