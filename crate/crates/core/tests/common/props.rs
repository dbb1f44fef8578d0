//! Invariant checks shared by the oracle tests and the acceptance harness.

use std::collections::BTreeSet;

use dendric_core::cliques::{phi_left, phi_right, side_graph, MultiClique};
use dendric_core::iet::{order_preserving, transfer_order, TotalOrder};
use dendric_core::language::{complexity, extension_graph, extension_table, restricted_extension_graph};
use dendric_core::returns::{antecedent, Antecedent};
use dendric_core::sadic_graph::permutations;
use dendric_core::*;
use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

pub fn random_primitive(rng: &mut ChaCha8Rng) -> Shift {
    loop {
        let d = rng.gen_range(2..=4);
        let a = Alphabet::digits(d);
        let images: Vec<Word> = (0..d)
            .map(|_| (0..rng.gen_range(1..=4)).map(|_| Letter(rng.gen_range(0..d) as u8)).collect())
            .collect();
        let Ok(m) = Morphism::new(a.clone(), a, images) else { continue };
        if !m.is_primitive().unwrap() {
            continue;
        }
        if let Ok(spec) = MorphicSpec::new(m, None, Letter(0)) {
            return Shift::new(spec).unwrap();
        }
    }
}


pub fn complexity_first_difference() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..20 {
        let s = random_primitive(&mut rng);
        for n in 0..=8 {
            let table = extension_table(&s, n).unwrap();
            let right: usize = table.values().map(|e| e.right.len() - 1).sum();
            let left: usize = table.values().map(|e| e.left.len() - 1).sum();
            let diff = complexity(&s, n + 1).unwrap() - complexity(&s, n).unwrap();
            assert_eq!(diff, right, "{} n={n}", s.spec().inner());
            assert_eq!(diff, left, "{} n={n}", s.spec().inner());
        }
    }
}


/// Searches for a simple cycle whose edges do not all carry the same label.
fn has_bicolored_cycle(g: &MultiClique) -> bool {
    let d = g.alphabet().len();
    let labels = |a: usize, b: usize| -> Vec<usize> {
        g.generators()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.contains(Letter(a as u8)) && c.contains(Letter(b as u8)))
            .map(|(i, _)| i)
            .collect()
    };
    fn walk(path: &mut Vec<usize>, d: usize, labels: &dyn Fn(usize, usize) -> Vec<usize>) -> bool {
        let last = *path.last().unwrap();
        if path.len() >= 2 {
            let closing = labels(last, path[0]);
            if path.len() == 2 {
                if closing.len() >= 2 {
                    return true;
                }
            } else if !closing.is_empty() {
                let mut sets: Vec<Vec<usize>> = path.windows(2).map(|p| labels(p[0], p[1])).collect();
                sets.push(closing);
                let mono = sets.iter().all(|s| s.len() == 1 && s[0] == sets[0][0]);
                if !mono {
                    return true;
                }
            }
        }
        for next in 0..d {
            if path.contains(&next) || labels(last, next).is_empty() {
                continue;
            }
            path.push(next);
            if walk(path, d, labels) {
                return true;
            }
            path.pop();
        }
        false
    }
    (0..d).any(|start| walk(&mut vec![start], d, &labels))
}

pub fn acyclicity_matches_cycle_enumeration() -> usize {
    let mut checked = 0;
    for d in 2..=5 {
        let alphabet = Alphabet::digits(d);
        let subsets: Vec<LetterSet> = (0u32..1 << d)
            .filter(|m| m.count_ones() >= 2)
            .map(|m| (0..d).filter(|i| m >> i & 1 == 1).map(|i| Letter(i as u8)).collect())
            .collect();
        for k in 0..=4 {
            for gens in (0..subsets.len()).combinations_with_replacement(k) {
                let g = MultiClique::new(alphabet.clone(), gens.iter().map(|&i| subsets[i])).unwrap();
                assert_eq!(g.is_acyclic_for_coloring(), !has_bicolored_cycle(&g), "{g}");
                checked += 1;
            }
        }
    }
    assert!(checked > 27_000);
    checked
}


pub fn acyclic_and_connected_equivalences() {
    for name in FIXTURES {
        let s = shift(name);
        for side in [Side::Left, Side::Right] {
            for n in 1..=8 {
                let words_acyclic = (0..n).all(|k| extension_table(&s, k).unwrap().values().all(|e| e.graph().is_acyclic()));
                let graphs_acyclic = (0..=n).all(|k| side_graph(&s, k, side).unwrap().is_acyclic_for_coloring());
                assert_eq!(words_acyclic, graphs_acyclic, "{name} {side:?} N={n}");
                if words_acyclic {
                    let words_connected =
                        (0..n).all(|k| extension_table(&s, k).unwrap().values().all(|e| e.graph().is_connected()));
                    let graph_connected = side_graph(&s, n, side).unwrap().is_connected();
                    assert_eq!(words_connected, graph_connected, "{name} {side:?} N={n}");
                }
            }
        }
    }
}


/// Every decomposition `u = s·σ(v)·p` with `s` a proper suffix of an image,
/// `p` a proper prefix of an extended image starting with the return word,
/// `v` a factor, and some bi-extension of `v` compatible with `s` and `p`.
fn brute_antecedents(rho: &ReturnMorphism, x: &Shift, u: &Word) -> Vec<(Word, Word, Word)> {
    let w = rho.word();
    let dom: Vec<Letter> = rho.domain().letters().collect();
    let suffixes: BTreeSet<Word> = dom
        .iter()
        .flat_map(|&a| {
            let img = rho.morphism().image(a);
            (1..=img.len()).map(move |i| Word::from(&img[i..]))
        })
        .collect();
    let prefixes: BTreeSet<Word> = dom
        .iter()
        .flat_map(|&b| {
            let ext = rho.extended_image(b);
            (w.len()..ext.len()).map(move |i| Word::from(&ext[..i])).collect::<Vec<_>>()
        })
        .collect();
    let mut out = Vec::new();
    for s in &suffixes {
        for p in &prefixes {
            if s.len() + p.len() > u.len() || !u.starts_with(s) || !u.ends_with(p) {
                continue;
            }
            let middle = &u[s.len()..u.len() - p.len()];
            for k in 0..=middle.len() {
                for v in x.factors(k).unwrap().iter() {
                    if rho.morphism().apply(v).unwrap().as_ref() != middle {
                        continue;
                    }
                    let g = restricted_extension_graph(x, v, rho, s, p).unwrap();
                    if !g.edges.is_empty() {
                        out.push((s.clone(), v.clone(), p.clone()));
                    }
                }
            }
        }
    }
    out
}

pub fn antecedents_are_unique_and_carry_extension_graphs() {
    let x = shift("arnoux_rauzy");
    for (name, sigma) in morphism_set("one_right_special.txt") {
        let rho = dendric_core::cliques::recognize(&sigma).unwrap();
        let y = Shift::new(x.spec().image_by(&sigma).unwrap()).unwrap();
        for n in 0..=8 {
            for u in y.factors(n).unwrap().iter() {
                let brute = brute_antecedents(&rho, &x, u);
                match antecedent(&rho, &x, u).unwrap() {
                    Antecedent::Initial => assert!(brute.is_empty(), "{name} {u:?}"),
                    Antecedent::Found { s, v, p } => {
                        assert_eq!(brute, vec![(s.clone(), v.clone(), p.clone())], "{name} {u:?}");
                        let restricted = restricted_extension_graph(&x, &v, &rho, &s, &p).unwrap();
                        let (fl, fr) = (phi_left(&rho, &s), phi_right(&rho, &p));
                        let mapped: BTreeSet<(Letter, Letter)> = restricted
                            .edges
                            .iter()
                            .map(|&(a, b)| (fl.get(a).unwrap(), fr.get(b).unwrap()))
                            .collect();
                        let direct: BTreeSet<(Letter, Letter)> =
                            extension_graph(&y, u).unwrap().edges.into_iter().collect();
                        assert_eq!(mapped, direct, "{name} {u:?}");
                    }
                }
            }
        }
    }
}


pub fn random_return_morphisms(rng: &mut ChaCha8Rng, d: usize, count: usize) -> Vec<ReturnMorphism> {
    let a = Alphabet::digits(d);
    let mut out = Vec::new();
    while out.len() < count {
        let images: Vec<Word> = (0..d)
            .map(|_| {
                let tail: Vec<Letter> = (0..rng.gen_range(0..=3)).map(|_| Letter(rng.gen_range(1..d) as u8)).collect();
                std::iter::once(Letter(0)).chain(tail).collect()
            })
            .collect();
        let Ok(m) = Morphism::new(a.clone(), a.clone(), images) else { continue };
        if let Ok(r) = dendric_core::cliques::recognize(&m) {
            out.push(r);
        }
    }
    out
}


fn all_orders(d: usize) -> Vec<TotalOrder> {
    permutations(d).into_iter().map(|p| TotalOrder::new(p).unwrap()).collect()
}

pub fn transferred_order_is_the_only_preserving_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut set: Vec<ReturnMorphism> = vec![rm("0>01 1>0"), rm("1>12 2>1"), rm("0>0 1>01")];
    for file in ["s3.txt", "one_right_special.txt"] {
        set.extend(morphism_set(file).iter().map(|(_, m)| dendric_core::cliques::recognize(m).unwrap()));
    }
    for d in 2..=4 {
        set.extend(random_return_morphisms(&mut rng, d, 6));
    }
    for rho in &set {
        let orders = all_orders(rho.domain().len());
        for side in [Side::Left, Side::Right] {
            for target in &orders {
                let good: Vec<&TotalOrder> =
                    orders.iter().filter(|o| order_preserving(side, rho, o, target)).collect();
                assert_eq!(good, vec![&transfer_order(side, rho, target)], "{} {side:?}", rho.morphism());
            }
        }
    }
}

