use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use ultrametric::distset::{Component, DistanceSetDescriptor};
use ultrametric::extension::{extend_with, gap_collapse_scaling, ExtensionResult, Mode, SymbolicScaling};
use ultrametric::generators::{dendrogram_to_space, max_space, random_space, squared_max_pair, two_level_probe, Dendrogram};
use ultrametric::preserving::{
    bounded_transform, classify_preserving, empirical_falsify, unbounded_transform, PiecewiseMonotone, PreservingTag,
};
use ultrametric::space::{validate, FiniteUltrametricSpace, SpaceFile, Verdict};
use ultrametric::wsim::{
    check_combinatorial_similarity, check_weak_similarity, compose, find_weak_similarities, invert, Bijection,
    WeakSimilarity, WsimCheck,
};
use ultrametric::Rational;

#[derive(Parser)]
#[command(name = "ultrametric", version, about = "Exact analysis of ultrametric spaces and their preserving functions")]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    /// Also print each number as a decimal with this many digits (approximate).
    #[arg(long, global = true, value_name = "DIGITS")]
    approx: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the (pseudo)ultrametric axioms of a distance matrix.
    Validate { space: PathBuf },
    /// Print the distance set of a finite space.
    Distset { space: PathBuf },
    /// Components of the complement of a distance-set descriptor.
    Components { descriptor: PathBuf },
    /// Extension regime of a distance-set descriptor.
    Classify { descriptor: PathBuf },
    /// Whether a descriptor has the shape of a totally bounded distance set.
    TbCheck { descriptor: PathBuf },
    /// Verify a bijection as a weak similarity and print its scaling function.
    WsimCheck {
        x: PathBuf,
        y: PathBuf,
        bijection: PathBuf,
        /// Check combinatorial similarity (equalities only) instead.
        #[arg(long)]
        combinatorial: bool,
    },
    /// Enumerate weak similarities between two spaces.
    WsimFind {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, default_value_t = 1000)]
        limit: usize,
    },
    /// Compose weak similarities X -> Y and Y -> Z.
    WsimCompose { x: PathBuf, y: PathBuf, z: PathBuf, first: PathBuf, second: PathBuf },
    /// Inverse of a weak similarity X -> Y.
    ScalingInvert { x: PathBuf, y: PathBuf, bijection: PathBuf },
    /// Decide whether a piecewise function preserves (pseudo)ultrametrics.
    PreserveClassify { function: PathBuf },
    /// Search random spaces for a counterexample to preservation.
    PreserveFalsify {
        function: PathBuf,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Target::Ultra)]
        target: Target,
        /// Worker threads for the trials (the reported result does not depend on it).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Apply d*·d/(1+d).
    TransformBound {
        space: PathBuf,
        #[arg(long = "d-star")]
        d_star: Rational,
    },
    /// Apply s/(d*−s), undoing transform-bound.
    TransformUnbound {
        space: PathBuf,
        #[arg(long = "d-star")]
        d_star: Rational,
    },
    /// Extend a symbolic scaling function to the whole half-line.
    Extend {
        scaling: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Comma-separated points at which to evaluate the extension.
        #[arg(long, value_delimiter = ',')]
        at: Vec<Rational>,
    },
    /// Scaling function that closes up a half-open gap (a, b] or [a, b).
    GapCollapse {
        descriptor: PathBuf,
        #[arg(long)]
        a: Rational,
        #[arg(long)]
        b: Rational,
    },
    /// Build finite spaces.
    #[command(subcommand)]
    Generate(Generate),
    /// The pair of spaces on 1, 1/2, …, 1/n with d = max² and δ = 1 + max.
    SquaredMax {
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
}

#[derive(Subcommand)]
enum Generate {
    /// From a dendrogram file.
    Dendrogram { file: PathBuf },
    /// Seeded random space with levels drawn from a pool.
    Random(RandomArgs),
    /// d(x, y) = max(x, y) on the given positive values.
    Max {
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<Rational>,
    },
    /// Three points with distances a, b, b.
    Probe {
        #[arg(long)]
        a: Rational,
        #[arg(long)]
        b: Rational,
    },
}

#[derive(Args)]
struct RandomArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_values_t = [Rational::from(1), Rational::from(2), Rational::from(3)])]
    levels: Vec<Rational>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Ultra,
    Pseudo,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Strict,
    Ultra,
    Pseudo,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Strict => Mode::Strict,
            ModeArg::Ultra => Mode::Ultra,
            ModeArg::Pseudo => Mode::Pseudo,
        }
    }
}

/// Whether the command ended affirmatively (exit 0) or with a definite
/// negative answer (exit 1).
enum Answer {
    Yes,
    No,
}

struct Out {
    json: bool,
    approx: Option<usize>,
}

impl Out {
    fn num(&self, r: &Rational) -> String {
        match self.approx {
            Some(k) => format!("{r} (≈ {})", r.to_decimal(k)),
            None => r.to_string(),
        }
    }

    fn emit(&self, value: Value, text: impl FnOnce() -> String) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(&value).expect("json values serialize"));
        } else {
            let s = text();
            print!("{s}");
            if !s.ends_with('\n') {
                println!();
            }
        }
    }

    fn table(&self, rows: &[(Rational, Rational)], left: &str, right: &str) -> String {
        let cells: Vec<(String, String)> = rows.iter().map(|(a, b)| (self.num(a), self.num(b))).collect();
        let w = cells.iter().map(|(a, _)| a.chars().count()).chain([left.chars().count()]).max().unwrap_or(1);
        let mut s = format!("{left:>w$}  {right}\n");
        for (a, b) in cells {
            s += &format!("{a:>w$}  {b}\n");
        }
        s
    }
}

fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn to_value<T: Serialize + ?Sized>(v: &T) -> Value {
    serde_json::to_value(v).expect("library types serialize")
}

fn print_space(space: &FiniteUltrametricSpace) -> Answer {
    println!("{}", serde_json::to_string(space).expect("spaces serialize"));
    Answer::Yes
}

fn verified(x: &FiniteUltrametricSpace, y: &FiniteUltrametricSpace, phi: Bijection) -> Result<WeakSimilarity> {
    match check_weak_similarity(x, y, &phi)? {
        WsimCheck::Similar { psi } => Ok(WeakSimilarity { phi, psi }),
        WsimCheck::Violation(v) => bail!("bijection is not a weak similarity: {v}"),
    }
}

fn wsim_value(w: &WeakSimilarity) -> Value {
    json!({ "map": w.phi.map, "scaling": w.psi.pairs() })
}

fn run(cli: Cli) -> Result<Answer> {
    let out = Out { json: cli.json, approx: cli.approx };
    Ok(match cli.command {
        Command::Validate { space } => {
            let file: SpaceFile = load(&space)?;
            let report = validate(&file.matrix)?;
            out.emit(to_value(&report), || match &report.witness {
                Some(w) => format!("{}, witness {w}", report.verdict),
                None => report.verdict.to_string(),
            });
            if report.verdict == Verdict::Ultrametric {
                Answer::Yes
            } else {
                Answer::No
            }
        }
        Command::Distset { space } => {
            let s: FiniteUltrametricSpace = load(&space)?;
            let ds = s.distance_set();
            out.emit(to_value(ds.values()), || ds.values().iter().map(|v| out.num(v)).collect::<Vec<_>>().join("\n"));
            Answer::Yes
        }
        Command::Components { descriptor } => {
            let d: DistanceSetDescriptor = load(&descriptor)?;
            let dec = d.components();
            out.emit(to_value(&dec), || {
                dec.components
                    .iter()
                    .map(|c| match c {
                        Component::Interval(iv) => format!("{iv}  {:?}", c.shape()),
                        Component::GapFamily(_) => c.to_string(),
                    })
                    .collect::<Vec<_>>()
                    .join("\n")
            });
            Answer::Yes
        }
        Command::Classify { descriptor } => {
            let d: DistanceSetDescriptor = load(&descriptor)?;
            let regime = d.classify();
            out.emit(to_value(&regime), || regime.to_string());
            Answer::Yes
        }
        Command::TbCheck { descriptor } => {
            let d: DistanceSetDescriptor = load(&descriptor)?;
            let tb = d.is_totally_bounded();
            out.emit(json!({ "totally_bounded": tb }), || format!("totally bounded: {tb}"));
            if tb {
                Answer::Yes
            } else {
                Answer::No
            }
        }
        Command::WsimCheck { x, y, bijection, combinatorial } => {
            let (x, y): (FiniteUltrametricSpace, FiniteUltrametricSpace) = (load(&x)?, load(&y)?);
            let phi: Bijection = load(&bijection)?;
            if combinatorial {
                let ok = check_combinatorial_similarity(&x, &y, &phi)?;
                out.emit(json!({ "combinatorial_similarity": ok }), || format!("combinatorial similarity: {ok}"));
                return Ok(if ok { Answer::Yes } else { Answer::No });
            }
            let check = check_weak_similarity(&x, &y, &phi)?;
            out.emit(to_value(&check), || match &check {
                WsimCheck::Similar { psi } => format!("weak similarity\n{}", out.table(psi.pairs(), "t", "psi(t)")),
                WsimCheck::Violation(v) => format!("not a weak similarity: {v}"),
            });
            match check {
                WsimCheck::Similar { .. } => Answer::Yes,
                WsimCheck::Violation(_) => Answer::No,
            }
        }
        Command::WsimFind { x, y, limit } => {
            let (x, y): (FiniteUltrametricSpace, FiniteUltrametricSpace) = (load(&x)?, load(&y)?);
            let found = find_weak_similarities(&x, &y, Some(limit));
            out.emit(Value::Array(found.iter().map(wsim_value).collect()), || {
                let Some(first) = found.first() else { return "no weak similarity".into() };
                let mut s = format!("{} weak similarit{}\n", found.len(), if found.len() == 1 { "y" } else { "ies" });
                for (i, w) in found.iter().enumerate() {
                    s += &format!("{}: {}\n", i + 1, w.phi);
                }
                s + &out.table(first.psi.pairs(), "t", "psi(t)")
            });
            if found.is_empty() {
                Answer::No
            } else {
                Answer::Yes
            }
        }
        Command::WsimCompose { x, y, z, first, second } => {
            let (x, y, z): (FiniteUltrametricSpace, FiniteUltrametricSpace, FiniteUltrametricSpace) =
                (load(&x)?, load(&y)?, load(&z)?);
            let a = verified(&x, &y, load(&first)?)?;
            let b = verified(&y, &z, load(&second)?)?;
            let c = compose(&a, &b)?;
            out.emit(wsim_value(&c), || format!("{}\n{}", c.phi, out.table(c.psi.pairs(), "t", "psi(t)")));
            Answer::Yes
        }
        Command::ScalingInvert { x, y, bijection } => {
            let (x, y): (FiniteUltrametricSpace, FiniteUltrametricSpace) = (load(&x)?, load(&y)?);
            let inv = invert(&verified(&x, &y, load(&bijection)?)?);
            out.emit(wsim_value(&inv), || format!("{}\n{}", inv.phi, out.table(inv.psi.pairs(), "s", "psi^-1(s)")));
            Answer::Yes
        }
        Command::PreserveClassify { function } => {
            let f: PiecewiseMonotone = load(&function)?;
            let v = classify_preserving(&f);
            out.emit(to_value(&v), || {
                let mut s = v.tag.to_string();
                if let Some(w) = &v.witness {
                    s += &format!(", witness {w}");
                }
                if v.strictly_increasing {
                    s += " (strictly increasing)";
                }
                s
            });
            if v.tag == PreservingTag::UltrametricPreserving {
                Answer::Yes
            } else {
                Answer::No
            }
        }
        Command::PreserveFalsify { function, trials, seed, target, threads } => {
            let f: PiecewiseMonotone = load(&function)?;
            let target = match target {
                Target::Ultra => Verdict::Ultrametric,
                Target::Pseudo => Verdict::PseudoultrametricOnly,
            };
            let search = || empirical_falsify(&f, trials, seed, target);
            let found = match threads {
                Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(search),
                None => search(),
            };
            out.emit(to_value(&found), || match &found {
                None => format!("no counterexample in {trials} trials"),
                Some(cx) => format!(
                    "counterexample (trial {}{}): {}\nspace: {}\ncomposed: {}",
                    cx.trial,
                    if cx.targeted { ", targeted probe" } else { "" },
                    cx.report.witness.as_ref().map(|w| format!("{}, {w}", cx.report.verdict)).unwrap_or_default(),
                    serde_json::to_string(&cx.space).expect("spaces serialize"),
                    serde_json::to_string(&cx.composed).expect("matrices serialize"),
                ),
            });
            if found.is_some() {
                Answer::No
            } else {
                Answer::Yes
            }
        }
        Command::TransformBound { space, d_star } => print_space(&bounded_transform(&load(&space)?, &d_star)?),
        Command::TransformUnbound { space, d_star } => print_space(&unbounded_transform(&load(&space)?, &d_star)?),
        Command::Extend { scaling, mode, at } => {
            let psi: SymbolicScaling = load(&scaling)?;
            match extend_with(&psi, mode.into())? {
                ExtensionResult::Extended(g) => {
                    let values = at.iter().map(|t| Ok((t.clone(), g.eval(t)?))).collect::<Result<Vec<_>>>()?;
                    let rows: Vec<Value> = values.iter().map(|(t, v)| json!({ "t": t, "g": v })).collect();
                    out.emit(json!({ "result": "extended", "mode": g.mode(), "values": rows }), || {
                        let mut s = format!("Extended ({})\n", format!("{:?}", g.mode()).to_lowercase());
                        for (t, v) in &values {
                            s += &format!("g({}) = {}\n", out.num(t), out.num(v));
                        }
                        s
                    });
                    Answer::Yes
                }
                ExtensionResult::Blocked(b) => {
                    out.emit(json!({ "result": "blocked", "blocked": b }), || b.to_string());
                    Answer::No
                }
            }
        }
        Command::GapCollapse { descriptor, a, b } => {
            let d: DistanceSetDescriptor = load(&descriptor)?;
            let psi = gap_collapse_scaling(&d, &a, &b)?;
            println!("{}", serde_json::to_string_pretty(&psi)?);
            Answer::Yes
        }
        Command::Generate(g) => print_space(&match g {
            Generate::Dendrogram { file } => dendrogram_to_space(&load::<Dendrogram>(&file)?)?,
            Generate::Random(r) => random_space(r.n, r.seed, &r.levels)?,
            Generate::Max { values } => max_space(&values)?,
            Generate::Probe { a, b } => two_level_probe(&a, &b)?,
        }),
        Command::SquaredMax { n } => {
            let (d, delta) = squared_max_pair(n)?;
            let psi = verified(&d, &delta, Bijection::identity(&d))?.psi;
            let value = json!({ "d": d, "delta": delta, "scaling": psi.pairs() });
            if out.json {
                println!("{}", serde_json::to_string_pretty(&value)?);
            } else {
                println!("{}", serde_json::to_string(&d)?);
                println!("{}", serde_json::to_string(&delta)?);
                print!("{}", out.table(psi.pairs(), "delta", "d"));
            }
            Answer::Yes
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Answer::Yes) => ExitCode::SUCCESS,
        Ok(Answer::No) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
