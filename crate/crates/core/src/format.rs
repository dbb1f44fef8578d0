//! Text formats for morphisms, shift specifications and morphism sets.
//!
//! A morphism is one rule per line, `a -> word`. Blank lines and anything
//! after `#` are ignored. A specification has an `[inner]` block, an
//! optional `[outer]` block and a `seed = <letter>` line. A morphism set is
//! a list of named blocks `[name]`.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::language::MorphicSpec;
use crate::words::{morphism_to_text, Morphism};

fn strip(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn parse_rule(line: &str, no: usize) -> Result<(char, String)> {
    let err = |msg: &str| Error::Parse { line: no, msg: msg.to_string() };
    let (lhs, rhs) = line.split_once("->").ok_or_else(|| err("expected `a -> word`"))?;
    let mut cs = lhs.trim().chars();
    let letter = match (cs.next(), cs.next()) {
        (Some(c), None) => c,
        _ => return Err(err("left-hand side must be a single letter")),
    };
    let image = rhs.trim();
    if image.is_empty() || image.chars().any(char::is_whitespace) {
        return Err(err("image must be a non-empty word"));
    }
    Ok((letter, image.to_string()))
}

fn build(rules: &[(char, String)], first_line: usize) -> Result<Morphism> {
    let mut seen: Vec<char> = rules.iter().map(|r| r.0).collect();
    seen.sort_unstable();
    if seen.windows(2).any(|p| p[0] == p[1]) {
        return Err(Error::Parse { line: first_line, msg: "letter defined twice".into() });
    }
    Morphism::from_rules(rules).map_err(|e| Error::Parse { line: first_line, msg: e.to_string() })
}

pub fn parse_morphism(text: &str) -> Result<Morphism> {
    let mut rules = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = strip(raw);
        if !line.is_empty() {
            rules.push(parse_rule(line, i + 1)?);
        }
    }
    if rules.is_empty() {
        return Err(Error::Parse { line: 1, msg: "no rules".into() });
    }
    build(&rules, 1)
}

struct Block {
    name: String,
    line: usize,
    rules: Vec<(char, String)>,
}

/// `key = value` line: line number, key, value.
type Setting = (usize, String, String);

fn blocks(text: &str) -> Result<(Vec<Block>, Vec<Setting>)> {
    let mut out: Vec<Block> = Vec::new();
    let mut settings = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let line = strip(raw);
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            out.push(Block { name: name.trim().to_string(), line: no, rules: Vec::new() });
        } else if line.contains("->") {
            let block = out.last_mut().ok_or(Error::Parse { line: no, msg: "rule outside a block".into() })?;
            block.rules.push(parse_rule(line, no)?);
        } else if let Some((k, v)) = line.split_once('=').filter(|(k, _)| is_key(k.trim())) {
            settings.push((no, k.trim().to_string(), v.trim().trim_matches('"').to_string()));
        } else {
            return Err(Error::Parse { line: no, msg: format!("cannot read {line:?}") });
        }
    }
    if let Some(b) = out.iter().find(|b| b.rules.is_empty()) {
        return Err(Error::Parse { line: b.line, msg: format!("block [{}] has no rules", b.name) });
    }
    Ok((out, settings))
}

fn is_key(k: &str) -> bool {
    k.len() > 1 && k.chars().all(|c| c.is_ascii_alphabetic() || c == '_')
}

pub fn parse_spec(text: &str) -> Result<MorphicSpec> {
    let (blocks, settings) = blocks(text)?;
    let mut inner = None;
    let mut outer = None;
    for b in &blocks {
        let m = build(&b.rules, b.line)?;
        match b.name.as_str() {
            "inner" => inner = Some(m),
            "outer" => outer = Some(m),
            other => return Err(Error::Parse { line: b.line, msg: format!("unknown block [{other}]") }),
        }
    }
    let inner = inner.ok_or(Error::Parse { line: 1, msg: "missing [inner] block".into() })?;
    let mut seed = inner.domain().letters().next().ok_or(Error::Parse { line: 1, msg: "empty alphabet".into() })?;
    for (no, k, v) in settings {
        match k.as_str() {
            "seed" => {
                let mut cs = v.chars();
                seed = match (cs.next(), cs.next()) {
                    (Some(c), None) => inner
                        .domain()
                        .letter(c)
                        .ok_or(Error::Parse { line: no, msg: format!("seed {c} is not a letter of [inner]") })?,
                    _ => return Err(Error::Parse { line: no, msg: "seed must be one letter".into() }),
                };
            }
            other => return Err(Error::Parse { line: no, msg: format!("unknown setting {other}") }),
        }
    }
    MorphicSpec::new(inner, outer, seed)
}

pub fn parse_morphism_set(text: &str) -> Result<Vec<(String, Morphism)>> {
    let (blocks, settings) = blocks(text)?;
    if let Some((no, k, _)) = settings.first() {
        return Err(Error::Parse { line: *no, msg: format!("unexpected setting {k}") });
    }
    blocks.iter().map(|b| Ok((b.name.clone(), build(&b.rules, b.line)?))).collect()
}

pub fn spec_to_text(spec: &MorphicSpec) -> String {
    let mut s = format!("seed = {}\n\n[inner]\n{}", spec.inner().domain().symbol(spec.seed()), morphism_to_text(spec.inner()));
    if !spec.is_pure() {
        s.push_str(&format!("\n[outer]\n{}", morphism_to_text(spec.outer())));
    }
    s
}

/// `{"a": "image", ...}` in domain order.
pub fn rules_json(m: &Morphism) -> Value {
    let mut map = serde_json::Map::new();
    for a in m.domain().letters() {
        map.insert(m.domain().symbol(a).to_string(), json!(m.codomain().render(m.image(a))));
    }
    Value::Object(map)
}
