//! One line per acceptance criterion. Exits non-zero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use dendric_core::cliques::{image_left, left_graph, tau_left, MultiClique};
use dendric_core::decide::{classify, valid_triplet, ClassifyOptions, FailedCondition, Verdict};
use dendric_core::iet::{decide_iet, iet_class_count, OrderPair, TotalOrder};
use dendric_core::language::{complexity, dendric_up_to, extension_graph};
use dendric_core::returns::{return_representation, DEFAULT_CHAIN_BUDGET};
use dendric_core::sadic_graph::{enumerate_trees, tree_pair_class_count};
use dendric_core::*;

type Check = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn cli(args: &[&str]) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_dendric")).args(args).output().expect("run dendric");
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stdout).into_owned())
}

fn path(name: &str) -> String {
    fixture_path(name).display().to_string()
}

fn verdict(name: &str) -> Verdict {
    classify(&shift(name), ClassifyOptions::default()).unwrap().verdict
}

fn edges(x: &Shift, u: &str) -> Vec<(u8, u8)> {
    let u = x.alphabet().word(u).unwrap();
    extension_graph(x, &u).unwrap().edges.iter().map(|&(a, b)| (a.0, b.0)).collect()
}

fn words(a: &Alphabet, list: &[&str]) -> BTreeSet<Word> {
    list.iter().map(|s| a.word(s).unwrap()).collect()
}

fn fibonacci() -> Check {
    let t = Instant::now();
    let spec = path("fibonacci.toml");
    let (_, out) = cli(&["factors", &spec, "-n", "3"]);
    ensure!(out == "001\n010\n100\n101\n", "factors n=3: {out:?}");
    let x = shift("fibonacci");
    ensure!(edges(&x, "") == [(0, 0), (0, 1), (1, 0)], "E(ε) = {:?}", edges(&x, ""));
    ensure!(edges(&x, "0") == [(0, 1), (1, 0), (1, 1)], "E(0) = {:?}", edges(&x, "0"));
    ensure!(edges(&x, "1") == [(0, 0)], "E(1) = {:?}", edges(&x, "1"));
    let (code, out) = cli(&["decide", &spec]);
    ensure!(code == 0 && out.contains("\"verdict\": \"Dendric\""), "decide exit {code}");
    let (_, out) = cli(&["threshold", &spec]);
    ensure!(out.trim() == "0", "threshold {out:?}");
    for n in 0..=30 {
        let p = complexity(&x, n).unwrap();
        ensure!(p == n + 1, "p({n}) = {p}");
    }
    let (code, out) = cli(&["iet", "decide", &spec]);
    ensure!(code == 0 && !out.trim().is_empty(), "iet decide exit {code}");
    ensure!(t.elapsed() < Duration::from_secs(5), "took {:?}", t.elapsed());
    Ok("factors, extension graphs of ε 0 1, Dendric, threshold 0, p(n)=n+1, IET pair".into())
}

fn thue_morse() -> Check {
    let x = shift("thue_morse");
    let k2 = MultiClique::complete(x.alphabet()).generators()[0];
    for (n, copies) in [(0, 1), (1, 2), (2, 2), (3, 4)] {
        let g = left_graph(&x, n).unwrap();
        ensure!(g.generators() == vec![k2; copies].as_slice(), "n={n}: {g}");
    }
    let v = verdict("thue_morse");
    ensure!(v == Verdict::NotEventuallyDendric, "{v:?}");
    Ok("left graphs 1,2,2,4 x {01}; NotEventuallyDendric".into())
}

fn chacon() -> Check {
    let x = shift("chacon");
    for n in 1..=20 {
        let p = complexity(&x, n).unwrap();
        ensure!(p == 2 * n + 1, "p({n}) = {p}");
    }
    let e02 = MultiClique::parse(x.alphabet(), "02").unwrap().generators()[0];
    for n in 1..=8 {
        let g = left_graph(&x, n).unwrap();
        ensure!(g.generators() == [e02, e02], "n={n}: {g}");
    }
    let (code, out) = cli(&["decide", &path("chacon.toml")]);
    ensure!(code == 3 && out.contains("NotEventuallyDendric"), "decide exit {code}");
    Ok("p(n)=2n+1, two {02} generators, NotEventuallyDendric".into())
}

fn image_of_sturmian() -> Check {
    let spec = path("image_sturmian.toml");
    let (_, out) = cli(&["check-dendric", &spec, "--up-to", "8"]);
    ensure!(out == "ε\n1\n", "check-dendric: {out:?}");
    let c = classify(&shift("image_sturmian"), ClassifyOptions::default()).unwrap();
    ensure!(c.verdict == Verdict::EventuallyDendric { threshold: 2 }, "{:?}", c.verdict);
    let edge = MultiClique::parse(shift("image_sturmian").alphabet(), "01").unwrap();
    ensure!(c.stable_left.as_ref() == Some(&edge), "left {:?}", c.stable_left);
    ensure!(c.stable_right.as_ref() == Some(&edge), "right {:?}", c.stable_right);
    let bad = dendric_up_to(&shift("image_sturmian"), 8).unwrap();
    ensure!(bad.len() == 2, "{bad:?}");
    Ok("non-dendric {ε, 1}, EventuallyDendric(2), single-edge graphs".into())
}

fn beta() -> ReturnMorphism {
    let text = std::fs::read_to_string(fixture_path("beta.txt")).unwrap();
    dendric_core::cliques::recognize(&dendric_core::format::parse_morphism(&text).unwrap()).unwrap()
}

fn beta_examples() -> Check {
    let raw = dendric_core::format::parse_morphism(&std::fs::read_to_string(fixture_path("beta.txt")).unwrap()).unwrap();
    let rec = ReturnMorphism::recognize(&raw).unwrap().ok_or("not a return morphism")?;
    let a = rec.domain().clone();
    ensure!(rec.word() == &a.word("0").unwrap(), "w = {}", a.show(rec.word()));
    ensure!(rec.initial_factors() == words(&a, &["", "1", "2", "3", "32"]), "initial factors");
    ensure!(rec.is_dendric(), "not dendric");
    ensure!(tau_left(&rec) == words(&a, &["", "2"]), "T^L");
    let g = MultiClique::parse(&a, "01 123").unwrap();
    let img = image_left(&rec, &g).unwrap();
    ensure!(img == MultiClique::parse(&a, "01 12 03").unwrap(), "image {img}");
    Ok("w=0, initial {ε,1,2,3,32}, dendric, T^L={ε,2}, image {{01},{12},{03}}".into())
}

fn enumeration_counts() -> Check {
    let got = [
        enumerate_trees(&Alphabet::digits(3)).len(),
        enumerate_trees(&Alphabet::digits(4)).len(),
        tree_pair_class_count(3),
        tree_pair_class_count(4),
        iet_class_count(3),
        iet_class_count(4),
    ];
    ensure!(got == [3, 16, 2, 14, 2, 9], "{got:?}");
    Ok("trees 3/16, tree-pair classes 2/14, IET classes 2/9".into())
}

fn triplets() -> Check {
    let b = beta();
    let a = b.domain().clone();
    let g = MultiClique::parse(&a, "01 123").unwrap();
    ensure!(valid_triplet(Side::Left, &image_left(&b, &g).unwrap(), &b, &g).unwrap().valid, "(β^L(G), β, G)");
    let star = MultiClique::parse(&a, "01 02 03").unwrap();
    let path = MultiClique::parse(&a, "01 02 23").unwrap();
    ensure!(valid_triplet(Side::Left, &star, &b, &path).unwrap().valid, "(star, β, path)");
    let mut targets = enumerate_trees(&a);
    targets.push(MultiClique::complete(&a));
    let expected = Some(FailedCondition::SubgraphDisconnected(a.word("2").unwrap()));
    for t in &targets {
        let v = valid_triplet(Side::Left, t, &b, &star).unwrap();
        ensure!(v.failed == expected, "target {t}: {:?}", v.failed);
    }
    Ok(format!("two valid triplets; star source fails at 2 for {} targets", targets.len()))
}

fn representation() -> Check {
    let x = shift("fibonacci");
    let rep = return_representation(&x, DEFAULT_CHAIN_BUDGET).map_err(|e| e.to_string())?;
    let (l, t) = (rep.lambda.morphism(), rep.theta.morphism());
    ensure!(l.to_string() == "1↦01, 2↦0", "λ = {l}");
    ensure!(t.to_string() == "1↦12, 2↦1", "θ = {t}");
    let word = l.apply(&t.power(8).unwrap().apply(&[Letter(0)]).unwrap()).unwrap();
    ensure!(x.spec().prefix(word.len()) == word, "λ(θ^8(1)) is not a prefix");
    Ok(format!("λ, θ as expected; λ(θ^8(1)) prefix of length {}", word.len()))
}

fn properties() -> Check {
    use common::props::*;
    complexity_first_difference();
    acyclic_and_connected_equivalences();
    antecedents_are_unique_and_carry_extension_graphs();
    transferred_order_is_the_only_preserving_one();
    let n = acyclicity_matches_cycle_enumeration();
    Ok(format!("complexity, equivalences, antecedents, transfer order, {n} cycle checks"))
}

fn iet_decisions() -> Check {
    let t = Instant::now();
    let fib = decide_iet(&shift("fibonacci")).map_err(|e| e.to_string())?;
    let fib_time = t.elapsed();
    let expected = OrderPair::new(TotalOrder::natural(2), TotalOrder::natural(2).reversed());
    ensure!(fib.as_ref() == Some(&expected), "fibonacci {fib:?}");
    let t = Instant::now();
    let trib = decide_iet(&shift("tribonacci")).map_err(|e| e.to_string())?;
    let trib_time = t.elapsed();
    ensure!(trib.is_none(), "tribonacci {trib:?}");
    let limit = Duration::from_secs(10);
    ensure!(fib_time < limit && trib_time < limit, "{fib_time:?} {trib_time:?}");
    Ok(format!("fibonacci {expected}, tribonacci none ({fib_time:.2?}, {trib_time:.2?})"))
}

fn main() {
    type Criterion = (usize, &'static str, fn() -> Check);
    let criteria: [Criterion; 10] = [
        (1, "fibonacci", fibonacci),
        (2, "thue-morse", thue_morse),
        (3, "chacon", chacon),
        (4, "image of sturmian", image_of_sturmian),
        (5, "beta", beta_examples),
        (6, "enumeration counts", enumeration_counts),
        (7, "valid triplets", triplets),
        (8, "return representation", representation),
        (9, "property suites", properties),
        (10, "interval exchanges", iet_decisions),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, name, check) in criteria {
        let t = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {n} ({name}): pass [{secs:.2}s] {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL [{secs:.2}s] {why}");
            }
        }
    }
    println!("{} of 10 criteria pass", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
