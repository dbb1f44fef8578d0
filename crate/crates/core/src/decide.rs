//! Valid triplets and the dendric / eventually dendric decision.

use serde::Serialize;
use serde_json::{json, Value};

use crate::cliques::{image, side_graph, stabilize, tau, MultiClique, Stabilization};
use crate::error::{Error, Result};
use crate::language::{dendric_up_to, periodicity_probe, MorphicSpec, Probe, Shift};
use crate::returns::{return_representation, ReturnMorphism, ReturnRepresentation, DEFAULT_CHAIN_BUDGET};
use crate::words::{morphism_to_text, Alphabet, Letter, Word};
use crate::Side;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum FailedCondition {
    /// The source graph is not acyclic for colouring and connected.
    SourceNotAcyclicConnected,
    /// The source graph restricted to the domain of `φ_s` (or `φ_p`) is disconnected.
    SubgraphDisconnected(Word),
    /// The image graph is not acyclic for colouring and connected.
    ImageNotAcyclicConnected,
    /// The image graph differs from the target.
    ImageMismatch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TripletVerdict {
    pub valid: bool,
    pub failed: Option<FailedCondition>,
}

impl TripletVerdict {
    fn fail(c: FailedCondition) -> Self {
        TripletVerdict { valid: false, failed: Some(c) }
    }

    pub fn describe(&self, alphabet: &Alphabet) -> String {
        match &self.failed {
            None => "valid".into(),
            Some(FailedCondition::SubgraphDisconnected(w)) => format!("SubgraphDisconnected({})", alphabet.show(w)),
            Some(c) => format!("{c:?}"),
        }
    }
}

/// Checks that `(target, σ, source)` is a valid triplet on the given side.
pub fn valid_triplet(side: Side, target: &MultiClique, rho: &ReturnMorphism, source: &MultiClique) -> Result<TripletVerdict> {
    if source.alphabet() != rho.domain() || target.alphabet() != rho.codomain() {
        return Err(Error::AlphabetMismatch);
    }
    if !(source.is_acyclic_for_coloring() && source.is_connected()) {
        return Ok(TripletVerdict::fail(FailedCondition::SourceNotAcyclicConnected));
    }
    for x in tau(side, rho) {
        let dom = match side {
            Side::Left => rho.left_domain(&x),
            Side::Right => rho.right_domain(&x),
        };
        if !source.induced(dom).is_connected() {
            return Ok(TripletVerdict::fail(FailedCondition::SubgraphDisconnected(x)));
        }
    }
    let img = image(side, rho, source)?;
    if !(img.is_acyclic_for_coloring() && img.is_connected()) {
        return Ok(TripletVerdict::fail(FailedCondition::ImageNotAcyclicConnected));
    }
    if &img != target {
        return Ok(TripletVerdict::fail(FailedCondition::ImageMismatch));
    }
    Ok(TripletVerdict { valid: true, failed: None })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Periodic { period: usize },
    Dendric,
    EventuallyDendric { threshold: usize },
    NotEventuallyDendric,
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Periodic { .. } => "Periodic",
            Verdict::Dendric => "Dendric",
            Verdict::EventuallyDendric { .. } => "EventuallyDendric",
            Verdict::NotEventuallyDendric => "NotEventuallyDendric",
            Verdict::Inconclusive { .. } => "Inconclusive",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Dendric => 0,
            Verdict::EventuallyDendric { .. } => 2,
            Verdict::NotEventuallyDendric => 3,
            Verdict::Periodic { .. } => 4,
            Verdict::Inconclusive { .. } => 5,
        }
    }

    pub fn threshold(&self) -> Option<usize> {
        match self {
            Verdict::Dendric => Some(0),
            Verdict::EventuallyDendric { threshold } => Some(*threshold),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// A factor of `x` whose extension graph is not a tree.
    NonDendricFactor(Word),
    /// An initial factor of `θ` that is not dendric in `𝓛(θ)`.
    ThetaNotDendric(Word),
    /// An initial factor of `λ` that is not dendric in `𝓛(λ)`.
    LambdaNotDendric(Word),
    /// `(G_{k+1}, θ, G_k)` is not valid.
    StabilizationFailure { side: Side, step: usize, verdict: TripletVerdict },
    /// `(λ(G), λ, G)` is not valid for the stable graph `G` of `y`.
    LambdaTriplet { side: Side, verdict: TripletVerdict },
}

#[derive(Clone, Copy, Debug)]
pub struct ClassifyOptions {
    pub probe_cap: usize,
    pub chain_budget: usize,
    /// Largest `n` tried when looking for `G_n(y)` equal to the stable graph.
    pub graph_search_cap: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { probe_cap: 40, chain_budget: DEFAULT_CHAIN_BUDGET, graph_search_cap: 512 }
    }
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub verdict: Verdict,
    pub probe: Probe,
    pub representation: Option<ReturnRepresentation>,
    pub left: Option<Stabilization>,
    pub right: Option<Stabilization>,
    /// `G^L(X)` and `G^R(X)` when the shift is eventually dendric.
    pub stable_left: Option<MultiClique>,
    pub stable_right: Option<MultiClique>,
    /// Length bound past which every factor is known to be dendric.
    pub scan_bound: Option<usize>,
    pub witnesses: Vec<Witness>,
}

impl Classification {
    fn new(verdict: Verdict, probe: Probe) -> Self {
        Classification {
            verdict,
            probe,
            representation: None,
            left: None,
            right: None,
            stable_left: None,
            stable_right: None,
            scan_bound: None,
            witnesses: Vec::new(),
        }
    }

    /// `{verdict, threshold?, lambda, theta, stable_left, stable_right, witnesses[]}`.
    pub fn report(&self, alphabet: &Alphabet) -> Value {
        let mut out = serde_json::Map::new();
        out.insert("verdict".into(), json!(self.verdict.name()));
        match &self.verdict {
            Verdict::EventuallyDendric { threshold } => {
                out.insert("threshold".into(), json!(threshold));
            }
            Verdict::Dendric => {
                out.insert("threshold".into(), json!(0));
            }
            Verdict::Periodic { period } => {
                out.insert("period".into(), json!(period));
            }
            Verdict::Inconclusive { reason } => {
                out.insert("reason".into(), json!(reason));
            }
            Verdict::NotEventuallyDendric => {}
        }
        if let Probe::NoStallUpTo(cap) = self.probe {
            out.insert("assumption".into(), json!(format!("aperiodic: complexity grows up to n = {cap}")));
        }
        let rules = |r: &ReturnMorphism| crate::format::rules_json(r.morphism());
        let rep = self.representation.as_ref();
        out.insert("lambda".into(), rep.map_or(Value::Null, |r| rules(&r.lambda)));
        out.insert("theta".into(), rep.map_or(Value::Null, |r| rules(&r.theta)));
        let graph = |g: &Option<MultiClique>| g.as_ref().map_or(Value::Null, |g| g.to_json());
        out.insert("stable_left".into(), graph(&self.stable_left));
        out.insert("stable_right".into(), graph(&self.stable_right));
        let derived = rep.map(|r| r.theta.codomain().clone());
        let lam = rep.map(|r| r.lambda.codomain().clone());
        let witnesses: Vec<Value> = self
            .witnesses
            .iter()
            .map(|w| match w {
                Witness::NonDendricFactor(f) => json!({"kind": "non_dendric_factor", "factor": alphabet.render(f)}),
                Witness::ThetaNotDendric(f) => json!({
                    "kind": "theta_not_dendric",
                    "factor": derived.as_ref().map_or(String::new(), |a| a.render(f)),
                }),
                Witness::LambdaNotDendric(f) => json!({
                    "kind": "lambda_not_dendric",
                    "factor": lam.as_ref().map_or(String::new(), |a| a.render(f)),
                }),
                Witness::StabilizationFailure { side, step, verdict } => json!({
                    "kind": "stabilization_failure",
                    "side": side.name(),
                    "step": step,
                    "condition": derived.as_ref().map_or(String::new(), |a| verdict.describe(a)),
                }),
                Witness::LambdaTriplet { side, verdict } => json!({
                    "kind": "lambda_triplet",
                    "side": side.name(),
                    "condition": lam.as_ref().map_or(String::new(), |a| verdict.describe(a)),
                }),
            })
            .collect();
        out.insert("witnesses".into(), Value::Array(witnesses));
        Value::Object(out)
    }

    /// Human-readable summary, one item per line.
    pub fn summary(&self, alphabet: &Alphabet) -> String {
        let mut s = format!("verdict: {}\n", self.verdict.name());
        if let Some(t) = self.verdict.threshold() {
            s.push_str(&format!("threshold: {t}\n"));
        }
        if let Verdict::Periodic { period } = self.verdict {
            s.push_str(&format!("complexity stalls at: {period}\n"));
        }
        if let Verdict::Inconclusive { reason } = &self.verdict {
            s.push_str(&format!("reason: {reason}\n"));
        }
        if let Some(r) = &self.representation {
            s.push_str(&format!("lambda: {}\ntheta: {}\n", r.lambda.morphism(), r.theta.morphism()));
        }
        if let Some(g) = &self.stable_left {
            s.push_str(&format!("stable left: {g}\n"));
        }
        if let Some(g) = &self.stable_right {
            s.push_str(&format!("stable right: {g}\n"));
        }
        for w in &self.witnesses {
            if let Witness::NonDendricFactor(f) = w {
                s.push_str(&format!("non-dendric: {}\n", alphabet.show(f)));
            }
        }
        s
    }
}

/// Decides whether the shift is dendric, eventually dendric, or neither.
///
/// `x = λ(θ^ω(1))` is computed from derived sequences. The fixed point `y`
/// of `θ` is dendric iff `θ` is a dendric return morphism and every step of
/// the graph stabilisation is a valid triplet; `X` is then eventually
/// dendric, and dendric iff `λ` passes the same tests on the stable graphs.
pub fn classify(shift: &Shift, opts: ClassifyOptions) -> Result<Classification> {
    let probe = periodicity_probe(shift, opts.probe_cap)?;
    if let Probe::Periodic(p) = probe {
        return Ok(Classification::new(Verdict::Periodic { period: p }, probe));
    }
    let rep = match return_representation(shift, opts.chain_budget) {
        Ok(r) => r,
        Err(e @ (Error::ChainBudgetExceeded(_) | Error::DerivationInconclusive(_) | Error::NotPrimitive)) => {
            return Ok(Classification::new(Verdict::Inconclusive { reason: e.to_string() }, probe));
        }
        Err(e) => return Err(e),
    };
    let mut out = Classification::new(Verdict::NotEventuallyDendric, probe);
    let theta = rep.theta.clone();
    let lambda = rep.lambda.clone();
    out.representation = Some(rep);

    let check = theta.dendric_check();
    if !check.dendric {
        out.witnesses.push(Witness::ThetaNotDendric(check.witness.unwrap_or_default()));
        return Ok(out);
    }
    let (left, right) = rayon::join(|| stabilize(&theta, Side::Left), || stabilize(&theta, Side::Right));
    let (left, right) = (left?, right?);
    for st in [&left, &right] {
        if let Some((step, verdict)) = &st.failure {
            out.witnesses.push(Witness::StabilizationFailure { side: st.side, step: *step, verdict: verdict.clone() });
        }
    }
    let stable = (left.stable().cloned(), right.stable().cloned());
    out.left = Some(left);
    out.right = Some(right);
    let (Some(gl), Some(gr)) = stable else {
        return Ok(out);
    };

    // y is dendric, so X is eventually dendric.
    let lambda_check = lambda.dendric_check();
    let mut lambda_ok = lambda_check.dendric;
    if let Some(w) = lambda_check.witness {
        out.witnesses.push(Witness::LambdaNotDendric(w));
    }
    for (side, g) in [(Side::Left, &gl), (Side::Right, &gr)] {
        let target = image(side, &lambda, g)?;
        let verdict = valid_triplet(side, &target, &lambda, g)?;
        if !verdict.valid {
            lambda_ok = false;
            out.witnesses.push(Witness::LambdaTriplet { side, verdict });
        }
    }
    out.stable_left = Some(image(Side::Left, &lambda, &gl)?);
    out.stable_right = Some(image(Side::Right, &lambda, &gr)?);

    let bound = match scan_bound(&theta, &lambda, &gl, &gr, opts.graph_search_cap) {
        Ok(b) => b,
        Err(Error::Invalid(reason)) => {
            out.verdict = Verdict::Inconclusive { reason };
            return Ok(out);
        }
        Err(e) => return Err(e),
    };
    out.scan_bound = Some(bound);
    let bad = dendric_up_to(shift, bound)?;
    let threshold = bad.last().map_or(0, |w| w.len() + 1);
    out.witnesses.extend(bad.into_iter().map(Witness::NonDendricFactor));
    out.verdict = match (lambda_ok, threshold) {
        (true, 0) => Verdict::Dendric,
        (false, t) if t > 0 => Verdict::EventuallyDendric { threshold: t },
        _ => Verdict::Inconclusive { reason: "graph test and factor scan disagree".into() },
    };
    Ok(out)
}

/// `K(N+1) + |w| - 1`, where `K` is the longest image of `λ`, `w` its
/// return word, and `N` the first length at which the left and right graphs
/// of `y` equal their stable values.
fn scan_bound(
    theta: &ReturnMorphism,
    lambda: &ReturnMorphism,
    gl: &MultiClique,
    gr: &MultiClique,
    cap: usize,
) -> Result<usize> {
    let y = Shift::new(MorphicSpec::pure(theta.morphism().clone(), Letter(0))?)?;
    let n = (0..=cap)
        .find(|&n| {
            side_graph(&y, n, Side::Left).is_ok_and(|g| &g == gl)
                && side_graph(&y, n, Side::Right).is_ok_and(|g| &g == gr)
        })
        .ok_or_else(|| Error::Invalid(format!("graphs of the derived shift did not reach their limit by n = {cap}")))?;
    let k = lambda.morphism().max_image_len();
    Ok(k * (n + 1) + lambda.word().len() - 1)
}

pub fn threshold(shift: &Shift) -> Result<Option<usize>> {
    Ok(classify(shift, ClassifyOptions::default())?.verdict.threshold())
}

/// `(G^L(X), G^R(X))` for an eventually dendric shift.
pub fn stabilized_graphs(shift: &Shift) -> Result<(MultiClique, MultiClique)> {
    let c = classify(shift, ClassifyOptions::default())?;
    match (c.stable_left, c.stable_right) {
        (Some(l), Some(r)) => Ok((l, r)),
        _ => Err(Error::Invalid(format!("no stable graphs: {}", c.verdict.name()))),
    }
}

/// Text dump of a return representation.
pub fn representation_text(rep: &ReturnRepresentation) -> String {
    format!(
        "[lambda]\n{}\n[theta]\n{}",
        morphism_to_text(rep.lambda.morphism()),
        morphism_to_text(rep.theta.morphism())
    )
}
