use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use dendric_core::cliques::{recognize, side_graph, MultiClique};
use dendric_core::decide::{classify, ClassifyOptions};
use dendric_core::format::{parse_morphism, parse_morphism_set, parse_spec, rules_json};
use dendric_core::iet::{build_iet_graph, decide_iet};
use dendric_core::language::{dendric_up_to, extensions};
use dendric_core::returns::return_representation;
use dendric_core::sadic_graph::{build_char_graph, quotient_by_permutations, CharGraph, Universe};
use dendric_core::{Alphabet, CancelToken, Error, Language, ReturnMorphism, Shift, Side};

const EXIT_USAGE: u8 = 64;
const EXIT_RUNTIME: u8 = 1;

/// Dendricity, eventual dendricity and interval exchange decisions for
/// morphic shifts.
#[derive(Parser, Debug)]
#[command(name = "dendric", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    caps: Caps,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Print progress notes to standard error.
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Args, Debug, Clone, Copy)]
struct Caps {
    /// Maximum number of successive derivations.
    #[arg(long, global = true, default_value_t = 64, value_parser = clap::value_parser!(u32).range(1..))]
    budget: u32,
    /// Largest length checked by the periodicity probe.
    #[arg(long, global = true, default_value_t = 40, value_parser = clap::value_parser!(u32).range(1..))]
    probe_cap: u32,
    /// Largest n tried when matching graphs of the derived shift.
    #[arg(long, global = true, default_value_t = 512, value_parser = clap::value_parser!(u32).range(1..))]
    graph_cap: u32,
    /// Abort long computations after this many seconds.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    timeout: Option<u64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Text,
    Dot,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SideArg {
    L,
    R,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::L => Side::Left,
            SideArg::R => Side::Right,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum UniverseArg {
    Trees,
    Multicliques,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the factors of length n.
    Factors {
        spec: PathBuf,
        #[arg(short, long)]
        n: usize,
    },
    /// Extensions and extension graph of a factor (`ε` or `""` for the empty word).
    Extensions { spec: PathBuf, word: String },
    /// List the non-dendric factors shorter than N.
    CheckDendric {
        spec: PathBuf,
        #[arg(long = "up-to")]
        up_to: usize,
    },
    /// Decide whether the shift is dendric, eventually dendric, or neither.
    Decide { spec: PathBuf },
    /// Smallest n such that every factor of length at least n is dendric.
    Threshold { spec: PathBuf },
    /// Left or right multi-clique of the factors of length n, or the stable one.
    Graphs {
        spec: PathBuf,
        #[arg(long, value_enum)]
        side: SideArg,
        /// Factor length.
        #[arg(short, long, conflicts_with = "stable", required_unless_present = "stable")]
        n: Option<usize>,
        /// The graph the sequence settles on, for eventually dendric shifts.
        #[arg(long)]
        stable: bool,
    },
    /// Return representation `x = λ(θ^ω(1))`.
    ReturnRep { spec: PathBuf },
    /// Characterising graph of a set of return morphisms.
    SadicGraph {
        /// Morphism set file, or a file with a single morphism.
        #[arg(long)]
        set: PathBuf,
        #[arg(long, value_enum, default_value = "l")]
        side: SideArg,
        #[arg(long, value_enum, default_value = "trees")]
        universe: UniverseArg,
        /// Quotient the pair of left and right tree graphs by relabelling.
        #[arg(long)]
        quotient: bool,
        /// Write a DOT rendering to this file.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Interval exchange decisions.
    Iet {
        #[command(subcommand)]
        command: IetCommand,
    },
}

#[derive(Subcommand, Debug)]
enum IetCommand {
    /// Find an order pair for which the shift codes an interval exchange.
    Decide { spec: PathBuf },
    /// Graph of order pairs labelled by a set of return morphisms.
    Graph {
        /// Morphism set file, or a file with a single morphism.
        #[arg(long)]
        set: PathBuf,
        /// Write a DOT rendering to this file.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
}

struct Ctx {
    format: Option<Format>,
    verbose: bool,
    cancel: CancelToken,
    opts: ClassifyOptions,
}

impl Ctx {
    fn note(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = std::result::Result<u8, Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: dendric_core::Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(|e| match e {
        Error::Parse { .. } => Failure::Usage(format!("{}: {e}", path.display())),
        e => Failure::Runtime(e.to_string()),
    })
}

/// Shift for decision commands; the inner morphism must be primitive.
fn load_shift(ctx: &Ctx, path: &Path) -> std::result::Result<Shift, Failure> {
    let spec = with_path(path, parse_spec(&read(path)?))?;
    Ok(Shift::new(spec)?.with_cancel(ctx.cancel.clone()))
}

/// Shift for exploratory commands; non-primitive input falls back to prefix scanning.
fn load_exploratory(ctx: &Ctx, path: &Path) -> std::result::Result<Shift, Failure> {
    let spec = with_path(path, parse_spec(&read(path)?))?;
    let shift = Shift::exploratory(spec)?.with_cancel(ctx.cancel.clone());
    if !shift.is_exact() {
        eprintln!("warning: inner morphism is not primitive; factors come from a prefix scan and may be incomplete");
    }
    Ok(shift)
}

/// A set file with `[name]` blocks, or a single morphism named after the file.
fn load_set(path: &Path) -> std::result::Result<(Vec<String>, Vec<ReturnMorphism>), Failure> {
    let text = read(path)?;
    let set = if text.lines().any(|l| l.trim_start().starts_with('[')) {
        with_path(path, parse_morphism_set(&text))?
    } else {
        let name = path.file_stem().map_or("sigma".into(), |s| s.to_string_lossy().into_owned());
        vec![(name, with_path(path, parse_morphism(&text))?)]
    };
    if set.is_empty() {
        return Err(Failure::Usage(format!("{}: no morphisms", path.display())));
    }
    let mut names = Vec::new();
    let mut rhos = Vec::new();
    for (name, m) in set {
        let rho = recognize(&m).map_err(|e| Failure::Runtime(format!("{name}: {e}")))?;
        names.push(name);
        rhos.push(rho);
    }
    Ok((names, rhos))
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json values serialise"));
}

fn write_dot(path: &Path, dot: &str) -> std::result::Result<(), Failure> {
    std::fs::write(path, dot).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn graph_json(g: &MultiClique) -> Value {
    g.to_json()
}

fn run(cli: Cli) -> Outcome {
    let cancel = match cli.caps.timeout {
        Some(s) => CancelToken::with_deadline(Instant::now() + Duration::from_secs(s)),
        None => CancelToken::new(),
    };
    let ctx = Ctx {
        format: cli.format,
        verbose: cli.verbose,
        cancel,
        opts: ClassifyOptions {
            probe_cap: cli.caps.probe_cap as usize,
            chain_budget: cli.caps.budget as usize,
            graph_search_cap: cli.caps.graph_cap as usize,
        },
    };
    match cli.command {
        Command::Factors { spec, n } => factors(&ctx, &spec, n),
        Command::Extensions { spec, word } => extensions_cmd(&ctx, &spec, &word),
        Command::CheckDendric { spec, up_to } => check_dendric(&ctx, &spec, up_to),
        Command::Decide { spec } => decide(&ctx, &spec),
        Command::Threshold { spec } => threshold(&ctx, &spec),
        Command::Graphs { spec, side, n, stable } => graphs(&ctx, &spec, side.into(), n, stable),
        Command::ReturnRep { spec } => return_rep(&ctx, &spec),
        Command::SadicGraph { set, side, universe, quotient, dot } => {
            sadic_graph(&ctx, &set, side.into(), universe, quotient, dot.as_deref())
        }
        Command::Iet { command: IetCommand::Decide { spec } } => iet_decide(&ctx, &spec),
        Command::Iet { command: IetCommand::Graph { set, dot } } => iet_graph(&ctx, &set, dot.as_deref()),
    }
}

fn factors(ctx: &Ctx, path: &Path, n: usize) -> Outcome {
    let shift = load_exploratory(ctx, path)?;
    let a = shift.alphabet().clone();
    let words: Vec<String> = shift.factors(n)?.iter().map(|w| a.show(w)).collect();
    match ctx.format_or(Format::Text) {
        Format::Json => print_json(&json!({"n": n, "count": words.len(), "factors": words})),
        _ => words.iter().for_each(|w| println!("{w}")),
    }
    Ok(0)
}

fn extensions_cmd(ctx: &Ctx, path: &Path, word: &str) -> Outcome {
    let shift = load_exploratory(ctx, path)?;
    let a = shift.alphabet().clone();
    let w = a.word(word).map_err(|e| Failure::Usage(format!("word {word:?}: {e}")))?;
    let e = extensions(&shift, &w)?;
    let g = e.graph();
    let edges: Vec<String> = e.bi.iter().map(|&(x, y)| format!("{}{}", a.symbol(x), a.symbol(y))).collect();
    match ctx.format_or(Format::Json) {
        Format::Text => {
            println!("word: {}", a.show(&w));
            println!("left: {}", a.render_set(e.left));
            println!("right: {}", a.render_set(e.right));
            println!("edges: {}", edges.join(" "));
            println!("tree: {}", g.is_tree());
        }
        _ => print_json(&json!({
            "word": a.show(&w),
            "left": a.render_set(e.left),
            "right": a.render_set(e.right),
            "edges": edges,
            "connected": g.is_connected(),
            "acyclic": g.is_acyclic(),
            "tree": g.is_tree(),
            "ordinary": e.is_ordinary(),
        })),
    }
    Ok(0)
}

fn check_dendric(ctx: &Ctx, path: &Path, up_to: usize) -> Outcome {
    let shift = load_exploratory(ctx, path)?;
    let a = shift.alphabet().clone();
    let bad: Vec<String> = dendric_up_to(&shift, up_to)?.iter().map(|w| a.show(w)).collect();
    match ctx.format_or(Format::Text) {
        Format::Json => print_json(&json!({"up_to": up_to, "non_dendric": bad})),
        _ => bad.iter().for_each(|w| println!("{w}")),
    }
    Ok(0)
}

fn classify_with(ctx: &Ctx, path: &Path) -> std::result::Result<(Shift, dendric_core::Classification), Failure> {
    let shift = load_shift(ctx, path)?;
    ctx.note(format!("classifying {}", path.display()));
    let c = classify(&shift, ctx.opts)?;
    ctx.note(format!("verdict {}", c.verdict.name()));
    Ok((shift, c))
}

fn decide(ctx: &Ctx, path: &Path) -> Outcome {
    let (shift, c) = classify_with(ctx, path)?;
    match ctx.format_or(Format::Json) {
        Format::Text => print!("{}", c.summary(shift.alphabet())),
        _ => print_json(&c.report(shift.alphabet())),
    }
    Ok(c.verdict.exit_code() as u8)
}

fn threshold(ctx: &Ctx, path: &Path) -> Outcome {
    let (_, c) = classify_with(ctx, path)?;
    match c.verdict.threshold() {
        Some(t) => println!("{t}"),
        None => println!("none ({})", c.verdict.name()),
    }
    Ok(c.verdict.exit_code() as u8)
}

fn graphs(ctx: &Ctx, path: &Path, side: Side, n: Option<usize>, stable: bool) -> Outcome {
    let g = if stable {
        let (_, c) = classify_with(ctx, path)?;
        let g = match side {
            Side::Left => c.stable_left,
            Side::Right => c.stable_right,
        };
        match g {
            Some(g) => g,
            None => {
                eprintln!("no stable graph: {}", c.verdict.name());
                return Ok(c.verdict.exit_code() as u8);
            }
        }
    } else {
        let shift = load_exploratory(ctx, path)?;
        side_graph(&shift, n.expect("clap requires n or stable"), side)?
    };
    match ctx.format_or(Format::Text) {
        Format::Json => print_json(&graph_json(&g)),
        Format::Dot => print!("{}", g.to_dot(&format!("G{}", side.name()))),
        Format::Text => println!("{g}"),
    }
    Ok(0)
}

fn return_rep(ctx: &Ctx, path: &Path) -> Outcome {
    let shift = load_shift(ctx, path)?;
    let rep = return_representation(&shift, ctx.opts.chain_budget)?;
    let w = |r: &ReturnMorphism| r.codomain().render(r.word());
    match ctx.format_or(Format::Json) {
        Format::Text => {
            println!("lambda: {} (return morphism for {})", rep.lambda.morphism(), w(&rep.lambda));
            println!("theta: {} (return morphism for {})", rep.theta.morphism(), w(&rep.theta));
            println!("verified prefix length: {}", rep.verified_prefix_length);
        }
        _ => print_json(&json!({
            "lambda": rules_json(rep.lambda.morphism()),
            "lambda_word": w(&rep.lambda),
            "theta": rules_json(rep.theta.morphism()),
            "theta_word": w(&rep.theta),
            "derivations": rep.n,
            "verified_prefix_length": rep.verified_prefix_length,
        })),
    }
    Ok(0)
}

fn char_graph_json(g: &CharGraph, names: &[String]) -> Value {
    json!({
        "side": g.side.name(),
        "vertices": g.vertices.iter().map(graph_json).collect::<Vec<_>>(),
        "edges": g.edges.iter().map(|e| json!({"from": e.from, "to": e.to, "morphism": names[e.morphism]})).collect::<Vec<_>>(),
    })
}

fn sadic_graph(
    ctx: &Ctx,
    set: &Path,
    side: Side,
    universe: UniverseArg,
    quotient: bool,
    dot: Option<&Path>,
) -> Outcome {
    let (names, rhos) = load_set(set)?;
    let universe = match universe {
        UniverseArg::Trees => Universe::Trees,
        UniverseArg::Multicliques => Universe::MultiCliques,
    };
    if quotient && universe != Universe::Trees {
        return Err(Failure::Usage("--quotient needs --universe trees".into()));
    }
    ctx.note(format!("building {} graph on {} morphisms", side.name(), rhos.len()));
    let g = build_char_graph(&rhos, side, universe)?;
    let mut out = char_graph_json(&g, &names);
    if quotient {
        let other = build_char_graph(&rhos, side.opposite(), universe)?;
        let (left, right) = match side {
            Side::Left => (&g, &other),
            Side::Right => (&other, &g),
        };
        let q = quotient_by_permutations(left, right)?;
        let a = &g.alphabet;
        out["quotient"] = json!({
            "classes": q.classes.iter().zip(&q.class_sizes).map(|((l, r), n)| json!({
                "left": graph_json(l),
                "right": graph_json(r),
                "size": n,
            })).collect::<Vec<_>>(),
            "edges": q.edges.iter().map(|e| json!({
                "from": e.from,
                "to": e.to,
                "morphism": names[e.morphism],
                "permutation": e.permutation.iter().map(|&l| a.symbol(l).to_string()).collect::<String>(),
                "composed": rules_json(&e.composed),
            })).collect::<Vec<_>>(),
        });
    }
    if let Some(p) = dot {
        write_dot(p, &g.to_dot(&names))?;
    }
    match ctx.format_or(Format::Json) {
        Format::Dot => print!("{}", g.to_dot(&names)),
        Format::Text => {
            for (i, v) in g.vertices.iter().enumerate() {
                println!("{i}: {v}");
            }
            print_edges(&g.edges, &names);
        }
        Format::Json => print_json(&out),
    }
    Ok(0)
}

fn print_edges(edges: &[dendric_core::sadic_graph::Edge], names: &[String]) {
    for e in edges {
        println!("{} -> {} [{}]", e.from, e.to, names[e.morphism]);
    }
}

fn iet_decide(ctx: &Ctx, path: &Path) -> Outcome {
    let shift = load_shift(ctx, path)?;
    let a: Alphabet = shift.alphabet().clone();
    match decide_iet(&shift) {
        Ok(Some(pair)) => {
            match ctx.format_or(Format::Text) {
                Format::Json => print_json(&json!({
                    "interval_exchange": true,
                    "left": pair.left.render(&a),
                    "right": pair.right.render(&a),
                })),
                _ => println!("{}", pair.render(&a)),
            }
            Ok(0)
        }
        Ok(None) => {
            match ctx.format_or(Format::Text) {
                Format::Json => print_json(&json!({"interval_exchange": false})),
                _ => println!("none"),
            }
            Ok(3)
        }
        Err(Error::NotDendricInput) => {
            eprintln!("the shift is not dendric, so it is not the coding of a regular interval exchange");
            Ok(3)
        }
        Err(e) => Err(e.into()),
    }
}

fn iet_graph(ctx: &Ctx, set: &Path, dot: Option<&Path>) -> Outcome {
    let (names, rhos) = load_set(set)?;
    let g = build_iet_graph(&rhos)?;
    let a = &g.alphabet;
    let classes = g.quotient_classes();
    if let Some(p) = dot {
        write_dot(p, &g.to_dot(&names))?;
    }
    match ctx.format_or(Format::Json) {
        Format::Dot => print!("{}", g.to_dot(&names)),
        Format::Text => {
            for (i, v) in g.vertices.iter().enumerate() {
                println!("{i}: {}", v.render(a).replace('\n', " / "));
            }
            print_edges(&g.edges, &names);
        }
        Format::Json => print_json(&json!({
            "vertices": g.vertices.iter().map(|v| json!({"left": v.left.render(a), "right": v.right.render(a)})).collect::<Vec<_>>(),
            "edges": g.edges.iter().map(|e| json!({"from": e.from, "to": e.to, "morphism": names[e.morphism]})).collect::<Vec<_>>(),
            "classes": classes,
        })),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
