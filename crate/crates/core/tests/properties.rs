mod common;

use common::*;
use dendric_core::cliques::{image, recognize, tau, MultiClique};
use dendric_core::format::parse_morphism;
use dendric_core::iet::{order_preserving, transfer_order, OrderPair, TotalOrder};
use dendric_core::sadic_graph::{build_char_graph, enumerate_trees, quotient_by_permutations, Universe};
use dendric_core::words::{compose_all, morphism_to_text};
use dendric_core::*;
use proptest::prelude::*;
use proptest::sample::subsequence;

fn word_over(d: usize, max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0..d as u8, 0..=max).prop_map(|v| w(&v))
}

fn morphism_over(d: usize) -> impl Strategy<Value = Morphism> {
    prop::collection::vec(prop::collection::vec(0..d as u8, 1..=4), d).prop_filter_map("every letter used", move |imgs| {
        let a = Alphabet::digits(d);
        Morphism::new(a.clone(), a, imgs.iter().map(|v| w(v)).collect()).ok()
    })
}

fn return_morphism_over(d: usize) -> impl Strategy<Value = ReturnMorphism> {
    prop::collection::vec(prop::collection::vec(1..d as u8, 0..=3), d).prop_filter_map("return morphism", move |tails| {
        let a = Alphabet::digits(d);
        let imgs = tails.iter().map(|t| std::iter::once(Letter(0)).chain(t.iter().map(|&l| Letter(l))).collect());
        Morphism::new(a.clone(), a, imgs.collect()).ok().and_then(|m| recognize(&m).ok())
    })
}

fn permutation(d: usize) -> impl Strategy<Value = Vec<Letter>> {
    Just((0..d as u8).map(Letter).collect::<Vec<_>>()).prop_shuffle()
}

fn multiclique(d: usize) -> impl Strategy<Value = MultiClique> {
    let subset = subsequence((0..d as u8).collect::<Vec<_>>(), 2..=d);
    prop::collection::vec(subset, 0..=4)
        .prop_map(move |gens| MultiClique::new(Alphabet::digits(d), gens.iter().map(|g| g.iter().map(|&l| Letter(l)).collect())).unwrap())
}

fn sized<T: std::fmt::Debug, S: Strategy<Value = T>>(f: impl Fn(usize) -> S) -> impl Strategy<Value = (usize, T)> {
    (2usize..=4).prop_flat_map(move |d| f(d).prop_map(move |t| (d, t)))
}

proptest! {
    #[test]
    fn apply_respects_concatenation((u, v, m) in (2usize..=4).prop_flat_map(|d| (word_over(d, 6), word_over(d, 6), morphism_over(d)))) {
        let uv = u.concat(&v);
        prop_assert_eq!(m.apply(&uv).unwrap(), m.apply(&u).unwrap().concat(&m.apply(&v).unwrap()));
    }

    #[test]
    fn composition_applies_inner_first((f, g, u) in (2usize..=4).prop_flat_map(|d| (morphism_over(d), morphism_over(d), word_over(d, 5)))) {
        let fg = compose(&f, &g).unwrap();
        prop_assert!(!fg.codomain_shrunk);
        prop_assert_eq!(fg.morphism.apply(&u).unwrap(), f.apply(&g.apply(&u).unwrap()).unwrap());
    }

    #[test]
    fn composition_is_associative((f, g, h) in (2usize..=3).prop_flat_map(|d| (morphism_over(d), morphism_over(d), morphism_over(d)))) {
        let left = compose(&compose(&f, &g).unwrap().morphism, &h).unwrap().morphism;
        let right = compose(&f, &compose(&g, &h).unwrap().morphism).unwrap().morphism;
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(compose_all(&[&f, &g, &h]).unwrap(), left);
    }

    #[test]
    fn morphism_text_round_trips((_, m) in sized(morphism_over)) {
        prop_assert_eq!(parse_morphism(&morphism_to_text(&m)).unwrap(), m);
    }

    #[test]
    fn graph_properties_survive_relabelling((g, pi) in (2usize..=5).prop_flat_map(|d| (multiclique(d), permutation(d)))) {
        let h = g.relabel(&pi);
        prop_assert_eq!(g.is_acyclic_for_coloring(), h.is_acyclic_for_coloring());
        prop_assert_eq!(g.is_connected(), h.is_connected());
        prop_assert_eq!(g.is_tree(), h.is_tree());
        prop_assert_eq!(g.edges().len(), h.edges().len());
    }

    #[test]
    fn normalizing_order_pairs((p, q) in (2usize..=5).prop_flat_map(|d| (permutation(d), permutation(d)))) {
        let pair = OrderPair::new(TotalOrder::new(p).unwrap(), TotalOrder::new(q).unwrap());
        let n = pair.normalized();
        prop_assert_eq!(n.normalized(), n.clone());
        prop_assert!(n == pair || n == pair.reversed());
        prop_assert_eq!(n.is_irreducible(), pair.is_irreducible());
    }

    #[test]
    fn irreducibility_survives_relabelling((p, q, pi) in (2usize..=5).prop_flat_map(|d| (permutation(d), permutation(d), permutation(d)))) {
        let pair = OrderPair::new(TotalOrder::new(p).unwrap(), TotalOrder::new(q).unwrap());
        prop_assert_eq!(pair.relabel(&pi).is_irreducible(), pair.is_irreducible());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transferred_orders_are_preserving((rho, target) in (2usize..=4).prop_flat_map(|d| (return_morphism_over(d), permutation(d)))) {
        let target = TotalOrder::new(target).unwrap();
        for side in [Side::Left, Side::Right] {
            let from = transfer_order(side, &rho, &target);
            prop_assert!(order_preserving(side, &rho, &from, &target));
        }
    }

    #[test]
    fn images_of_valid_sources_are_acyclic_and_connected(
        (rho, g) in (2usize..=4).prop_flat_map(|d| {
            let trees = enumerate_trees(&Alphabet::digits(d));
            (return_morphism_over(d).prop_filter("dendric", |r| r.is_dendric()), prop::sample::select(trees))
        })
    ) {
        for side in [Side::Left, Side::Right] {
            let domain = |x: &Word| match side {
                Side::Left => rho.left_domain(x),
                Side::Right => rho.right_domain(x),
            };
            if tau(side, &rho).iter().all(|x| g.induced(domain(x)).is_connected()) {
                let img = image(side, &rho, &g).unwrap();
                prop_assert!(img.is_acyclic_for_coloring() && img.is_connected(), "{} {}", rho.morphism(), g);
            }
        }
    }
}

#[test]
fn quotient_classes_partition_all_tree_pairs() {
    for d in 3..=4 {
        let a = Alphabet::digits(d);
        let alpha = rm(["0>0 1>01 2>02", "0>0 1>01 2>02 3>03"][d - 3]);
        let l = build_char_graph(std::slice::from_ref(&alpha), Side::Left, Universe::Trees).unwrap();
        let r = build_char_graph(std::slice::from_ref(&alpha), Side::Right, Universe::Trees).unwrap();
        let q = quotient_by_permutations(&l, &r).unwrap();
        let trees = enumerate_trees(&a).len();
        assert_eq!(q.class_sizes.iter().sum::<usize>(), trees * trees);
        for (i, (tl, tr)) in q.classes.iter().enumerate() {
            let orbit: std::collections::BTreeSet<_> = dendric_core::sadic_graph::permutations(d)
                .iter()
                .map(|pi| (tl.relabel(pi), tr.relabel(pi)))
                .collect();
            assert_eq!(orbit.len(), q.class_sizes[i]);
        }
    }
}
