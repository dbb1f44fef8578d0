#![allow(dead_code)]

pub mod props;

use std::path::PathBuf;

use dendric_core::cliques::recognize;
use dendric_core::format::{parse_morphism_set, parse_spec};
use dendric_core::{Letter, MorphicSpec, Morphism, ReturnMorphism, Shift, Word};

pub const FIXTURES: [&str; 8] = [
    "fibonacci",
    "tribonacci",
    "thue_morse",
    "chacon",
    "image_sturmian",
    "arnoux_rauzy",
    "periodic",
    "iet3",
];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn spec(name: &str) -> MorphicSpec {
    let text = std::fs::read_to_string(fixture_path(&format!("{name}.toml"))).unwrap();
    parse_spec(&text).unwrap()
}

pub fn shift(name: &str) -> Shift {
    Shift::new(spec(name)).unwrap()
}

pub fn morphism_set(file: &str) -> Vec<(String, Morphism)> {
    parse_morphism_set(&std::fs::read_to_string(fixture_path(file)).unwrap()).unwrap()
}

pub fn m(s: &str) -> Morphism {
    Morphism::parse_inline(s).unwrap()
}

pub fn rm(s: &str) -> ReturnMorphism {
    recognize(&m(s)).unwrap()
}

pub fn pure(s: &str) -> Shift {
    Shift::new(MorphicSpec::pure(m(s), Letter(0)).unwrap()).unwrap()
}

pub fn w(letters: &[u8]) -> Word {
    letters.iter().map(|&l| Letter(l)).collect()
}
