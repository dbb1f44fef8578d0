//! Graphs whose infinite paths are the dendric directive sequences over a
//! set of return morphisms.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use rayon::prelude::*;

use crate::cliques::{image, MultiClique};
use crate::decide::valid_triplet;
use crate::error::{Error, Result};
use crate::returns::ReturnMorphism;
use crate::words::{compose, Alphabet, Letter, LetterSet, Morphism};
use crate::Side;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Universe {
    /// Labelled trees on the alphabet.
    Trees,
    /// Acyclic connected multi-cliques without repeated generators.
    MultiCliques,
}

/// All `d^(d-2)` labelled trees on the alphabet, decoded from Prüfer sequences.
pub fn enumerate_trees(alphabet: &Alphabet) -> Vec<MultiClique> {
    let d = alphabet.len();
    if d < 2 {
        return vec![MultiClique::new(alphabet.clone(), []).unwrap()];
    }
    let mut out: Vec<MultiClique> = (0..d - 2)
        .map(|_| 0..d)
        .multi_cartesian_product()
        .map(|seq| prufer_decode(alphabet, &seq))
        .collect();
    out.sort();
    out
}

fn prufer_decode(alphabet: &Alphabet, seq: &[usize]) -> MultiClique {
    let d = seq.len() + 2;
    let mut degree = vec![1usize; d];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(d - 1);
    for &s in seq {
        let leaf = (0..d).find(|&v| degree[v] == 1).unwrap();
        edges.push([leaf, s]);
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..d).filter(|&v| degree[v] == 1).collect();
    edges.push([rest[0], rest[1]]);
    MultiClique::new(
        alphabet.clone(),
        edges.iter().map(|e| e.iter().map(|&v| Letter(v as u8)).collect::<LetterSet>()),
    )
    .unwrap()
}

/// Acyclic connected multi-cliques whose generators are pairwise distinct.
pub fn enumerate_multicliques(alphabet: &Alphabet) -> Vec<MultiClique> {
    let d = alphabet.len();
    let subsets: Vec<LetterSet> = (0u64..1 << d).map(LetterSet).filter(|s| s.len() >= 2).collect();
    if subsets.len() > 20 {
        return Vec::new();
    }
    let mut out: Vec<MultiClique> = (0u64..1 << subsets.len())
        .into_par_iter()
        .filter_map(|mask| {
            let gens = (0..subsets.len()).filter(|i| mask >> i & 1 == 1).map(|i| subsets[i]);
            let g = MultiClique::new(alphabet.clone(), gens).unwrap();
            (g.is_acyclic_for_coloring() && g.is_connected()).then_some(g)
        })
        .collect();
    out.sort();
    out
}

/// Edge `from → to` labelled by `morphism`: `(vertices[from], σ, vertices[to])`
/// is a valid triplet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub morphism: usize,
}

#[derive(Clone, Debug)]
pub struct CharGraph {
    pub side: Side,
    pub alphabet: Alphabet,
    pub vertices: Vec<MultiClique>,
    pub morphisms: Vec<ReturnMorphism>,
    pub edges: Vec<Edge>,
}

fn check_set(set: &[ReturnMorphism]) -> Result<Alphabet> {
    let first = set.first().ok_or_else(|| Error::Invalid("empty morphism set".into()))?;
    let alphabet = first.domain().clone();
    for r in set {
        if r.domain() != &alphabet || r.codomain() != &alphabet {
            return Err(Error::NotEndomorphism);
        }
    }
    Ok(alphabet)
}

pub fn build_char_graph(set: &[ReturnMorphism], side: Side, universe: Universe) -> Result<CharGraph> {
    let alphabet = check_set(set)?;
    let vertices = match universe {
        Universe::Trees => enumerate_trees(&alphabet),
        Universe::MultiCliques => {
            if alphabet.len() > 4 {
                return Err(Error::Invalid("multi-clique universe is limited to 4 letters".into()));
            }
            enumerate_multicliques(&alphabet)
        }
    };
    let index: BTreeMap<&MultiClique, usize> = vertices.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut edges: Vec<Edge> = (0..vertices.len())
        .into_par_iter()
        .flat_map_iter(|to| {
            let source = &vertices[to];
            let index = &index;
            set.iter().enumerate().filter_map(move |(k, rho)| {
                let target = image(side, rho, source).ok()?;
                let from = *index.get(&target)?;
                valid_triplet(side, &target, rho, source).ok()?.valid.then_some(Edge { from, to, morphism: k })
            })
        })
        .collect();
    edges.sort();
    Ok(CharGraph { side, alphabet, vertices, morphisms: set.to_vec(), edges })
}

impl CharGraph {
    pub fn vertex_index(&self, g: &MultiClique) -> Option<usize> {
        self.vertices.iter().position(|v| v == g)
    }

    pub fn has_edge(&self, from: &MultiClique, to: &MultiClique, morphism: usize) -> bool {
        match (self.vertex_index(from), self.vertex_index(to)) {
            (Some(f), Some(t)) => self.edges.contains(&Edge { from: f, to: t, morphism }),
            _ => false,
        }
    }

    pub fn to_dot(&self, names: &[String]) -> String {
        let mut s = format!("digraph {} {{\n", self.side.name());
        for (i, v) in self.vertices.iter().enumerate() {
            s.push_str(&format!("  v{i} [label=\"{v}\"];\n"));
        }
        for e in &self.edges {
            s.push_str(&format!("  v{} -> v{} [label=\"{}\"];\n", e.from, e.to, label(names, e.morphism)));
        }
        s.push_str("}\n");
        s
    }
}

fn label(names: &[String], k: usize) -> String {
    names.get(k).cloned().unwrap_or_else(|| format!("m{k}"))
}

/// Whether some infinite path is labelled `prefix · cycle^ω`.
pub fn path_query(n: usize, edges: &[Edge], prefix: &[usize], cycle: &[usize]) -> bool {
    if cycle.is_empty() {
        return false;
    }
    // pre(S, σ): vertices with a σ-edge into S
    let pre = |set: &BTreeSet<usize>, k: usize| -> BTreeSet<usize> {
        edges.iter().filter(|e| e.morphism == k && set.contains(&e.to)).map(|e| e.from).collect()
    };
    let pre_word = |set: &BTreeSet<usize>, word: &[usize]| {
        word.iter().rev().fold(set.clone(), |acc, &k| pre(&acc, k))
    };
    // greatest fixed point of W = pre(W, cycle)
    let mut w: BTreeSet<usize> = (0..n).collect();
    loop {
        let next: BTreeSet<usize> = pre_word(&w, cycle).intersection(&w).copied().collect();
        if next == w {
            break;
        }
        w = next;
    }
    !pre_word(&w, prefix).is_empty()
}

/// Completes a valid triplet `(G', σ, G)` with a covering tree `T'` of `G'`
/// into a covering tree `T` of `G` with `(T', σ, T)` valid, splitting one
/// generator of `G` at a time.
pub fn refine_to_trees(
    side: Side,
    target: &MultiClique,
    rho: &ReturnMorphism,
    source: &MultiClique,
    target_tree: &MultiClique,
) -> Result<MultiClique> {
    if !valid_triplet(side, target, rho, source)?.valid {
        return Err(Error::InvalidInputTriplet);
    }
    if !target_tree.is_tree() || !target_tree.is_covering_subgraph_of(target) {
        return Err(Error::NotACoveringTree);
    }
    let tree_edges = target_tree.edges();
    let mut gens: Vec<LetterSet> = source.generators().to_vec();
    let taus: Vec<_> = crate::cliques::tau(side, rho).into_iter().collect();
    for _ in 0..=source.edges().len() {
        let g = MultiClique::on(source.alphabet().clone(), source.vertices(), gens.clone())?;
        let img = image(side, rho, &g)?;
        if img.is_tree() && g.is_tree() {
            if &img != target_tree || !valid_triplet(side, &img, rho, &g)?.valid {
                return Err(Error::Invalid("refinement left the covering tree".into()));
            }
            return Ok(g);
        }
        // choose the generator C_i, the map φ and the pair (a, b) to separate
        let (i, f, a, b) = if !img.is_tree() {
            let mut pick = None;
            'outer: for x in &taus {
                let f = crate::cliques::phi(side, rho, x);
                for (i, &c) in gens.iter().enumerate() {
                    let cimg = f.image_of(c);
                    if cimg.len() >= 3 {
                        pick = Some((i, f, cimg));
                        break 'outer;
                    }
                }
            }
            let (i, f, cimg) = pick.ok_or_else(|| Error::Invalid("no generator to split".into()))?;
            let in_c = |e: &&(Letter, Letter)| cimg.contains(e.0) && cimg.contains(e.1);
            let sub: Vec<(Letter, Letter)> = tree_edges.iter().filter(in_c).copied().collect();
            let degree = |v: Letter| sub.iter().filter(|e| e.0 == v || e.1 == v).count();
            let a = cimg.iter().find(|&v| degree(v) == 1).ok_or(Error::NotACoveringTree)?;
            let &(x, y) = sub.iter().find(|e| e.0 == a || e.1 == a).unwrap();
            let b = if x == a { y } else { x };
            (i, f, a, b)
        } else {
            let i = gens.iter().position(|c| c.len() >= 3).ok_or_else(|| Error::Invalid("no generator to split".into()))?;
            let members: Vec<Letter> = gens[i].iter().collect();
            let x = common_affix(side, rho, &members);
            let f = crate::cliques::phi(side, rho, &x);
            let cimg = f.image_of(gens[i]);
            let preimages = |t: Letter| members.iter().filter(|&&d| f.get(d) == Some(t)).count();
            let b = cimg.iter().find(|&t| preimages(t) >= 2).ok_or_else(|| Error::Invalid("no repeated image".into()))?;
            let a = cimg.iter().find(|&t| t != b).ok_or_else(|| Error::Invalid("degenerate image".into()))?;
            (i, f, a, b)
        };
        let c = gens[i].iter().find(|&d| f.get(d) == Some(b)).unwrap();
        let mut d_set: LetterSet = gens[i].iter().filter(|&d| f.get(d) == Some(a)).collect();
        d_set.insert(c);
        let mut e_set = gens[i].difference(d_set);
        e_set.insert(c);
        gens.remove(i);
        gens.push(d_set);
        gens.push(e_set);
    }
    Err(Error::Invalid("refinement did not terminate".into()))
}

/// Longest common suffix of the images (left) or common prefix of the
/// extended images (right) of `members`.
fn common_affix(side: Side, rho: &ReturnMorphism, members: &[Letter]) -> Vec<Letter> {
    let words: Vec<Vec<Letter>> = members
        .iter()
        .map(|&a| match side {
            Side::Left => rho.morphism().image(a).to_vec(),
            Side::Right => rho.extended_image(a).to_vec(),
        })
        .collect();
    let mut acc = words[0].clone();
    for w in &words[1..] {
        acc = match side {
            Side::Left => crate::words::longest_common_suffix(&acc, w).to_vec(),
            Side::Right => crate::words::longest_common_prefix(&acc, w).to_vec(),
        };
    }
    acc
}

/// All permutations of the alphabet, as image vectors.
pub fn permutations(d: usize) -> Vec<Vec<Letter>> {
    (0..d).map(|i| Letter(i as u8)).permutations(d).collect()
}

#[derive(Clone, Debug)]
pub struct QuotientEdge {
    pub from: usize,
    pub to: usize,
    pub morphism: usize,
    /// `π` with `π(rep(to)) = to`; the edge carries `σ∘π`.
    pub permutation: Vec<Letter>,
    pub composed: Morphism,
}

/// Pairs of trees `(T_L, T_R)` up to simultaneous relabelling.
#[derive(Clone, Debug)]
pub struct TreePairQuotient {
    pub classes: Vec<(MultiClique, MultiClique)>,
    pub class_sizes: Vec<usize>,
    pub edges: Vec<QuotientEdge>,
}

type TreePair = (MultiClique, MultiClique);

fn canonical_pair(p: &TreePair, perms: &[Vec<Letter>]) -> (TreePair, Vec<Letter>) {
    perms
        .iter()
        .map(|pi| ((p.0.relabel(pi), p.1.relabel(pi)), pi.clone()))
        .min_by(|x, y| x.0.cmp(&y.0))
        .unwrap()
}

fn inverse(pi: &[Letter]) -> Vec<Letter> {
    let mut inv = vec![Letter(0); pi.len()];
    for (i, &l) in pi.iter().enumerate() {
        inv[l.index()] = Letter(i as u8);
    }
    inv
}

pub fn quotient_by_permutations(left: &CharGraph, right: &CharGraph) -> Result<TreePairQuotient> {
    if left.vertices != right.vertices || left.morphisms != right.morphisms {
        return Err(Error::Invalid("left and right graphs must share vertices and morphisms".into()));
    }
    if left.vertices.iter().any(|v| !v.is_tree()) {
        return Err(Error::Invalid("quotient needs the tree universe".into()));
    }
    let perms = permutations(left.alphabet.len());
    let n = left.vertices.len();
    let mut rep_of: BTreeMap<TreePair, (TreePair, Vec<Letter>)> = BTreeMap::new();
    for a in &left.vertices {
        for b in &right.vertices {
            let p = (a.clone(), b.clone());
            let c = canonical_pair(&p, &perms);
            rep_of.insert(p, c);
        }
    }
    let mut classes: Vec<(MultiClique, MultiClique)> = rep_of.values().map(|c| c.0.clone()).collect();
    classes.sort();
    classes.dedup();
    let class_index: BTreeMap<&(MultiClique, MultiClique), usize> = classes.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut class_sizes = vec![0; classes.len()];
    for c in rep_of.values() {
        class_sizes[class_index[&c.0]] += 1;
    }
    let left_edges: BTreeSet<Edge> = left.edges.iter().copied().collect();
    let mut edges = Vec::new();
    for re in &right.edges {
        for from_l in 0..n {
            for to_l in 0..n {
                if !left_edges.contains(&Edge { from: from_l, to: to_l, morphism: re.morphism }) {
                    continue;
                }
                let from = (left.vertices[from_l].clone(), right.vertices[re.from].clone());
                if rep_of[&from].0 != from {
                    continue;
                }
                let to = (left.vertices[to_l].clone(), right.vertices[re.to].clone());
                let (rep_to, pi) = &rep_of[&to];
                // pi sends `to` to its representative; the edge needs the inverse
                let back = inverse(pi);
                let perm = Morphism::permutation(&left.alphabet, &back)?;
                let composed = compose(left.morphisms[re.morphism].morphism(), &perm)?.morphism;
                edges.push(QuotientEdge {
                    from: class_index[&from],
                    to: class_index[rep_to],
                    morphism: re.morphism,
                    permutation: back,
                    composed,
                });
            }
        }
    }
    edges.sort_by(|x, y| (x.from, x.to, x.morphism, &x.permutation).cmp(&(y.from, y.to, y.morphism, &y.permutation)));
    Ok(TreePairQuotient { classes, class_sizes, edges })
}

/// Number of classes of tree pairs on `d` letters under relabelling.
pub fn tree_pair_class_count(d: usize) -> usize {
    let alphabet = Alphabet::digits(d);
    let trees = enumerate_trees(&alphabet);
    let perms = permutations(d);
    let mut reps = BTreeSet::new();
    for a in &trees {
        for b in &trees {
            reps.insert(canonical_pair(&(a.clone(), b.clone()), &perms).0);
        }
    }
    reps.len()
}

/// The four one-right-special return morphisms on `{0,1,2,3}`.
pub fn one_right_special_family() -> Vec<(String, Morphism)> {
    [
        ("alpha", "0>0 1>01 2>02 3>03"),
        ("beta", "0>0 1>01 2>02 3>032"),
        ("gamma", "0>0 1>01 2>021 3>031"),
        ("delta", "0>0 1>01 2>021 3>0321"),
    ]
    .iter()
    .map(|(n, s)| (n.to_string(), Morphism::parse_inline(s).unwrap()))
    .collect()
}
