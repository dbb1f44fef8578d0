//! Multi-clique graphs: unions of cliques, one colour per generator.

use std::collections::BTreeSet;
use std::fmt;

use serde_json::json;

use crate::decide::{valid_triplet, TripletVerdict};
use crate::error::{Error, Result};
use crate::language::{extension_table, Dsu, Language};
use crate::returns::ReturnMorphism;
use crate::words::{longest_common_prefix, longest_common_suffix, Alphabet, Letter, LetterSet, Morphism, Word};
use crate::Side;

/// Graph `G({C_i})` given by a multiset of generators of size at least 2.
/// Parallel generators are kept: they stand for distinct special factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiClique {
    alphabet: Alphabet,
    vertices: LetterSet,
    generators: Vec<LetterSet>,
}

impl MultiClique {
    pub fn new(alphabet: Alphabet, generators: impl IntoIterator<Item = LetterSet>) -> Result<Self> {
        let vertices = alphabet.full();
        Self::on(alphabet, vertices, generators)
    }

    /// Graph on a subset of the alphabet.
    pub fn on(alphabet: Alphabet, vertices: LetterSet, generators: impl IntoIterator<Item = LetterSet>) -> Result<Self> {
        if !vertices.is_subset(alphabet.full()) {
            return Err(Error::Invalid("vertex outside the alphabet".into()));
        }
        let mut gens = Vec::new();
        for g in generators {
            if !g.is_subset(vertices) {
                return Err(Error::Invalid(format!("generator {g:?} uses a letter outside the vertex set")));
            }
            if g.len() >= 2 {
                gens.push(g);
            }
        }
        gens.sort();
        Ok(MultiClique { alphabet, vertices, generators: gens })
    }

    /// Convenience constructor from letter indices.
    pub fn from_lists(alphabet: &Alphabet, gens: &[&[u8]]) -> Result<Self> {
        MultiClique::new(alphabet.clone(), gens.iter().map(|g| g.iter().map(|&i| Letter(i)).collect()))
    }

    /// Parses `"01 123 03"`: generators written with symbols.
    pub fn parse(alphabet: &Alphabet, s: &str) -> Result<Self> {
        let gens = s
            .split(|c: char| c.is_whitespace() || c == ',' || c == '{' || c == '}')
            .filter(|t| !t.is_empty())
            .map(|t| alphabet.word(t).map(|w| w.iter().copied().collect()))
            .collect::<Result<Vec<LetterSet>>>()?;
        MultiClique::new(alphabet.clone(), gens)
    }

    /// The complete graph with a single colour.
    pub fn complete(alphabet: &Alphabet) -> Self {
        MultiClique::new(alphabet.clone(), [alphabet.full()]).expect("full set is valid")
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn vertices(&self) -> LetterSet {
        self.vertices
    }

    pub fn generators(&self) -> &[LetterSet] {
        &self.generators
    }

    /// Edges without multiplicity.
    pub fn edges(&self) -> BTreeSet<(Letter, Letter)> {
        let mut out = BTreeSet::new();
        for g in &self.generators {
            let v: Vec<Letter> = g.iter().collect();
            for i in 0..v.len() {
                for j in i + 1..v.len() {
                    out.insert((v[i], v[j]));
                }
            }
        }
        out
    }

    /// Two generators share at most one vertex and the vertex-generator
    /// incidence graph is a forest.
    pub fn is_acyclic_for_coloring(&self) -> bool {
        let g = &self.generators;
        for i in 0..g.len() {
            for j in i + 1..g.len() {
                if g[i].intersection(g[j]).len() > 1 {
                    return false;
                }
            }
        }
        let mut dsu = Dsu::new(64 + g.len());
        for (i, c) in g.iter().enumerate() {
            for v in c.iter() {
                if !dsu.union(v.index(), 64 + i) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_connected(&self) -> bool {
        let mut dsu = Dsu::new(64);
        for c in &self.generators {
            let first = c.first().unwrap();
            for v in c.iter() {
                dsu.union(first.index(), v.index());
            }
        }
        let roots: BTreeSet<usize> = self.vertices.iter().map(|v| dsu.find(v.index())).collect();
        roots.len() <= 1
    }

    /// Acyclic for colouring, connected, and every generator is an edge.
    pub fn is_tree(&self) -> bool {
        self.generators.iter().all(|g| g.len() == 2) && self.is_acyclic_for_coloring() && self.is_connected()
    }

    /// Subgraph induced on `s`.
    pub fn induced(&self, s: LetterSet) -> MultiClique {
        let s = s.intersection(self.vertices);
        let gens = self.generators.iter().map(|g| g.intersection(s));
        MultiClique::on(self.alphabet.clone(), s, gens).expect("subset")
    }

    /// Every edge of `self` is an edge of `other`, on the same vertex set.
    pub fn is_covering_subgraph_of(&self, other: &MultiClique) -> bool {
        self.vertices == other.vertices && self.edges().is_subset(&other.edges())
    }

    /// Relabels letters: `a` becomes `perm[a]`.
    pub fn relabel(&self, perm: &[Letter]) -> MultiClique {
        let map = |s: LetterSet| s.iter().map(|l| perm[l.index()]).collect::<LetterSet>();
        MultiClique::on(self.alphabet.clone(), map(self.vertices), self.generators.iter().map(|&g| map(g)))
            .expect("permutation keeps subsets")
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("graph {name} {{\n  edge [colorscheme=set312];\n");
        for v in self.vertices.iter() {
            s.push_str(&format!("  \"{}\";\n", self.alphabet.symbol(v)));
        }
        for (i, g) in self.generators.iter().enumerate() {
            let v: Vec<Letter> = g.iter().collect();
            for a in 0..v.len() {
                for b in a + 1..v.len() {
                    s.push_str(&format!(
                        "  \"{}\" -- \"{}\" [color={}];\n",
                        self.alphabet.symbol(v[a]),
                        self.alphabet.symbol(v[b]),
                        i % 12 + 1
                    ));
                }
            }
        }
        s.push_str("}\n");
        s
    }

    /// `{"vertices": "0123", "generators": ["01", "123"]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let a = &self.alphabet;
        json!({
            "vertices": a.render_set(self.vertices),
            "generators": self.generators.iter().map(|g| a.render_set(*g)).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for MultiClique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, g) in self.generators.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{{{}}}", self.alphabet.render_set(*g))?;
        }
        f.write_str("}")
    }
}

/// `G^L_n(X)`: one generator `E^L(v)` per factor `v` of length `n` with at
/// least two left extensions.
pub fn left_graph(lang: &dyn Language, n: usize) -> Result<MultiClique> {
    side_graph(lang, n, Side::Left)
}

pub fn right_graph(lang: &dyn Language, n: usize) -> Result<MultiClique> {
    side_graph(lang, n, Side::Right)
}

pub fn side_graph(lang: &dyn Language, n: usize, side: Side) -> Result<MultiClique> {
    let table = extension_table(lang, n)?;
    let gens = table.values().map(|e| match side {
        Side::Left => e.left,
        Side::Right => e.right,
    });
    MultiClique::new(lang.alphabet().clone(), gens)
}

/// Map defined on a subset of the domain letters of a morphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialLetterMap {
    pub domain: LetterSet,
    images: Vec<Option<Letter>>,
}

impl PartialLetterMap {
    pub fn get(&self, a: Letter) -> Option<Letter> {
        self.images.get(a.index()).copied().flatten()
    }

    /// `φ(C ∩ dom)`.
    pub fn image_of(&self, c: LetterSet) -> LetterSet {
        c.iter().filter_map(|a| self.get(a)).collect()
    }

    pub fn pairs(&self) -> Vec<(Letter, Letter)> {
        self.domain.iter().map(|a| (a, self.get(a).unwrap())).collect()
    }
}

/// `𝒯^L(σ)`: longest common suffixes of `σ(a), σ(b)` over `a ≠ b`.
pub fn tau_left(rho: &ReturnMorphism) -> BTreeSet<Word> {
    let imgs = rho.morphism().images();
    let mut out = BTreeSet::new();
    for i in 0..imgs.len() {
        for j in i + 1..imgs.len() {
            out.insert(Word::from(longest_common_suffix(&imgs[i], &imgs[j])));
        }
    }
    out
}

/// `𝒯^R(σ)`: longest common prefixes of `σ(a)w, σ(b)w` over `a ≠ b`.
pub fn tau_right(rho: &ReturnMorphism) -> BTreeSet<Word> {
    let ext: Vec<Word> = rho.domain().letters().map(|a| rho.extended_image(a)).collect();
    let mut out = BTreeSet::new();
    for i in 0..ext.len() {
        for j in i + 1..ext.len() {
            out.insert(Word::from(longest_common_prefix(&ext[i], &ext[j])));
        }
    }
    out
}

pub fn tau(side: Side, rho: &ReturnMorphism) -> BTreeSet<Word> {
    match side {
        Side::Left => tau_left(rho),
        Side::Right => tau_right(rho),
    }
}

/// `a ↦` the letter just before `s` in `σ(a)`, for `σ(a) ∈ 𝒜⁺s`.
pub fn phi_left(rho: &ReturnMorphism, s: &[Letter]) -> PartialLetterMap {
    let domain = rho.left_domain(s);
    let mut images = vec![None; rho.domain().len()];
    for a in domain.iter() {
        let img = rho.morphism().image(a);
        images[a.index()] = Some(img[img.len() - s.len() - 1]);
    }
    PartialLetterMap { domain, images }
}

/// `b ↦` the letter just after `p` in `σ(b)w`, for `σ(b)w ∈ p𝒜⁺`.
pub fn phi_right(rho: &ReturnMorphism, p: &[Letter]) -> PartialLetterMap {
    let domain = rho.right_domain(p);
    let mut images = vec![None; rho.domain().len()];
    for b in domain.iter() {
        images[b.index()] = Some(rho.extended_image(b)[p.len()]);
    }
    PartialLetterMap { domain, images }
}

pub fn phi(side: Side, rho: &ReturnMorphism, x: &[Letter]) -> PartialLetterMap {
    match side {
        Side::Left => phi_left(rho, x),
        Side::Right => phi_right(rho, x),
    }
}

/// `σ^L(G)` or `σ^R(G)`.
pub fn image(side: Side, rho: &ReturnMorphism, g: &MultiClique) -> Result<MultiClique> {
    if g.alphabet() != rho.domain() {
        return Err(Error::AlphabetMismatch);
    }
    let mut gens = Vec::new();
    for s in tau(side, rho) {
        let f = phi(side, rho, &s);
        gens.extend(g.generators().iter().map(|&c| f.image_of(c)));
    }
    MultiClique::new(rho.codomain().clone(), gens)
}

pub fn image_left(rho: &ReturnMorphism, g: &MultiClique) -> Result<MultiClique> {
    image(Side::Left, rho, g)
}

pub fn image_right(rho: &ReturnMorphism, g: &MultiClique) -> Result<MultiClique> {
    image(Side::Right, rho, g)
}

/// Iterates `G ↦ θ(G)` from the complete graph until a fixed point.
#[derive(Clone, Debug)]
pub struct Stabilization {
    pub side: Side,
    /// `G_0, G_1, ...` up to the fixed point or the first invalid step.
    pub trace: Vec<MultiClique>,
    /// Set when `(G_{k+1}, θ, G_k)` is not valid; holds `k` and the verdict.
    pub failure: Option<(usize, TripletVerdict)>,
}

impl Stabilization {
    pub fn stable(&self) -> Option<&MultiClique> {
        if self.failure.is_some() {
            None
        } else {
            self.trace.last()
        }
    }
}

pub fn stabilize(theta: &ReturnMorphism, side: Side) -> Result<Stabilization> {
    if !theta.morphism().is_endomorphism() {
        return Err(Error::NotEndomorphism);
    }
    let d = theta.domain().len();
    let cap = if d * d >= 20 { 1 << 20 } else { 1usize << (d * d) };
    let mut trace = vec![MultiClique::complete(theta.domain())];
    for k in 0..cap {
        let cur = &trace[k];
        let next = image(side, theta, cur)?;
        let verdict = valid_triplet(side, &next, theta, cur)?;
        if !verdict.valid {
            return Ok(Stabilization { side, trace, failure: Some((k, verdict)) });
        }
        if &next == cur {
            return Ok(Stabilization { side, trace, failure: None });
        }
        if trace.contains(&next) {
            return Err(Error::InternalMonotonicityBreach);
        }
        trace.push(next);
    }
    Err(Error::InternalMonotonicityBreach)
}

/// [`ReturnMorphism::recognize`], with "not a return morphism" as an error.
pub fn recognize(m: &Morphism) -> Result<ReturnMorphism> {
    ReturnMorphism::recognize(m)?.ok_or_else(|| Error::Invalid(format!("{m} is not a return morphism")))
}
