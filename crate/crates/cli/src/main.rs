use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bsharp_core::hull::{co_infinity, four_term_membership, hull_membership, ExtReal};
use bsharp_core::oracle::{convergence_sweep, PIndex};
use bsharp_core::scalar::{boxplus_all, lambda_map, residual_index_set};
use bsharp_core::separation::{search_separator_with, verify_separator, GeneratedBSet};
use bsharp_core::{IndexSet, Orthant, Tolerance};
use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "bsharp", version, about = "Limit sums, two-point hulls and separators over (ℝ, ⊞)")]
struct Cli {
    /// Magnitudes closer than this are treated as tied.
    #[arg(long, global = true, default_value_t = 0.0)]
    tie_eps: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Points per sampled set.
    #[arg(long, global = true, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    /// Comma-separated p values for `converge`.
    #[arg(long, global = true, value_delimiter = ',', default_values_t = [5u32, 20, 100, 300])]
    p_list: Vec<u32>,
    /// Write the JSON result here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Read the JSON input from a file instead of positional arguments.
    #[arg(long, global = true)]
    file: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ϝ over all entries of a vector, its residual set and Λ.
    Nary {
        /// JSON array, e.g. '[2,3,-2]'. With --file: the same array.
        x: Option<String>,
    },
    /// The piecewise hull Co^∞(x, y). With --file: {"x": [...], "y": [...]}.
    Hull2 { x: Option<String>, y: Option<String> },
    /// Whether z lies in Co^∞(x, y). With --file: {"z", "x", "y"}.
    Member {
        z: Option<String>,
        x: Option<String>,
        y: Option<String>,
    },
    /// Hausdorff distance between Co^p(x, y) and Co^∞(x, y) for each p.
    Converge { x: Option<String>, y: Option<String> },
    /// Search for a separating `a` between two generated sets.
    Separate {
        /// JSON file {"orthant": [±1, ...], "generators": [[...], ...]}.
        c1: PathBuf,
        c2: PathBuf,
        /// Candidate coefficient vectors to try.
        #[arg(long, default_value_t = 1000)]
        budget: usize,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<bsharp_core::Error> for Failure {
    fn from(e: bsharp_core::Error) -> Self {
        Failure::input(e.to_string())
    }
}

/// JSON text plus the exit code it is reported with.
struct Report {
    json: String,
    code: u8,
}

fn report(value: &impl Serialize, code: u8) -> Result<Report, Failure> {
    let json = serde_json::to_string(value).map_err(|e| Failure::input(e.to_string()))?;
    Ok(Report { json, code })
}

fn parse<T: DeserializeOwned>(text: &str, what: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::input(format!("cannot parse {what}: {e}")))
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

/// Positional JSON arguments, or the named fields of the `--file` object.
fn vectors(file: Option<&Path>, positional: &[(&str, &Option<String>)]) -> Result<Vec<Vec<f64>>, Failure> {
    match file {
        Some(path) => {
            let text = read(path)?;
            let mut object: serde_json::Map<String, serde_json::Value> = parse(&text, &path.display().to_string())?;
            positional
                .iter()
                .map(|(name, _)| {
                    let value = object
                        .remove(*name)
                        .ok_or_else(|| Failure::input(format!("{} has no field \"{name}\"", path.display())))?;
                    serde_json::from_value(value).map_err(|e| Failure::input(format!("field \"{name}\": {e}")))
                })
                .collect()
        }
        None => positional
            .iter()
            .map(|(name, arg)| match arg {
                Some(text) => parse(text, name),
                None => Err(Failure::input(format!("missing argument {name} (or use --file)"))),
            })
            .collect(),
    }
}

fn one_based(set: &IndexSet) -> Vec<usize> {
    set.iter().map(|i| i + 1).collect()
}

#[derive(Serialize)]
struct NaryOut {
    value: f64,
    residual_set: Vec<usize>,
    lambda: Vec<f64>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum Param {
    Finite(f64),
    Infinite(&'static str),
}

#[derive(Serialize)]
struct BreakPointOut {
    t: Param,
    point: Vec<f64>,
    /// Coordinates (1-based) that vanish at this breakpoint.
    sources: Vec<usize>,
}

#[derive(Serialize)]
struct HullOut {
    x: Vec<f64>,
    y: Vec<f64>,
    breakpoints: Vec<BreakPointOut>,
    /// Positions in `breakpoints`.
    segments: Vec<[usize; 2]>,
}

#[derive(Serialize)]
struct MemberOut {
    member: bool,
    via: &'static str,
    segment: bool,
    four_term: bool,
}

#[derive(Serialize)]
struct Row {
    p: u32,
    hausdorff: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SetFile {
    orthant: Vec<i8>,
    generators: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct SeparateOut {
    found: bool,
    a: Option<Vec<f64>>,
    #[serde(rename = "sup_C1")]
    sup_c1: Option<f64>,
    #[serde(rename = "inf_C2")]
    inf_c2: Option<f64>,
}

fn load_set(path: &Path) -> Result<GeneratedBSet, Failure> {
    let raw: SetFile = parse(&read(path)?, &path.display().to_string())?;
    Ok(GeneratedBSet::new(Orthant::new(raw.orthant)?, raw.generators)?)
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    let tol = Tolerance::new(cli.tie_eps)?;
    let samples = usize::try_from(cli.samples).map_err(|_| Failure::input("--samples is too large"))?;
    let file = cli.file.as_deref();
    match &cli.command {
        Command::Nary { x } => {
            let x = match file {
                Some(path) => parse::<Vec<f64>>(&read(path)?, &path.display().to_string())?,
                None => vectors(None, &[("x", x)])?.remove(0),
            };
            let out = NaryOut {
                value: boxplus_all(&x, tol)?,
                residual_set: one_based(&residual_index_set(&x, &IndexSet::full(x.len()), tol)?),
                lambda: lambda_map(&x, tol)?,
            };
            report(&out, 0)
        }
        Command::Hull2 { x, y } => {
            let [x, y]: [Vec<f64>; 2] = vectors(file, &[("x", x), ("y", y)])?.try_into().expect("two vectors");
            let hull = co_infinity(&x, &y, tol)?;
            let breakpoints = hull
                .breakpoints
                .iter()
                .map(|b| BreakPointOut {
                    t: match b.t {
                        ExtReal::Finite(t) => Param::Finite(t),
                        ExtReal::Infinity => Param::Infinite("inf"),
                    },
                    point: b.point.clone(),
                    sources: b.sources.iter().map(|i| i + 1).collect(),
                })
                .collect();
            let segments = hull.segments.iter().map(|&(a, b)| [a, b]).collect();
            report(&HullOut { x, y, breakpoints, segments }, 0)
        }
        Command::Member { z, x, y } => {
            let [z, x, y]: [Vec<f64>; 3] =
                vectors(file, &[("z", z), ("x", x), ("y", y)])?.try_into().expect("three vectors");
            let hull = co_infinity(&x, &y, tol)?;
            let segment = hull_membership(&z, &hull, tol)?;
            let four_term = four_term_membership(&z, &x, &y, tol)?;
            if segment != four_term {
                return Err(Failure {
                    code: 3,
                    message: format!(
                        "membership tests disagree for z = {z:?}: segment {segment}, four-term {four_term}"
                    ),
                });
            }
            let out = MemberOut { member: segment, via: "segment", segment, four_term };
            report(&out, if segment { 0 } else { 1 })
        }
        Command::Converge { x, y } => {
            let [x, y]: [Vec<f64>; 2] = vectors(file, &[("x", x), ("y", y)])?.try_into().expect("two vectors");
            if cli.p_list.is_empty() {
                return Err(Failure::input("--p-list is empty"));
            }
            let ps = cli.p_list.iter().map(|&p| PIndex::new(p)).collect::<Result<Vec<_>, _>>()?;
            let count = samples.max(2);
            let rows: Vec<Row> = convergence_sweep(&x, &y, &ps, count, cli.seed, tol)?
                .into_iter()
                .map(|r| Row { p: r.p, hausdorff: r.hausdorff })
                .collect();
            report(&rows, 0)
        }
        Command::Separate { c1, c2, budget } => {
            let (c1, c2) = (load_set(c1)?, load_set(c2)?);
            let found = search_separator_with(&c1, &c2, *budget, samples, cli.seed, tol)?;
            let out = match found {
                Some(a) => {
                    let check = verify_separator(&a, &c1, &c2, samples, cli.seed, tol)?;
                    if !check.separated {
                        return Err(Failure {
                            code: 3,
                            message: format!("separator {a:?} failed its verification replay: {check:?}"),
                        });
                    }
                    SeparateOut { found: true, a: Some(a), sup_c1: Some(check.sup_c1), inf_c2: Some(check.inf_c2) }
                }
                None => SeparateOut { found: false, a: None, sup_c1: None, inf_c2: None },
            };
            let code = if out.found { 0 } else { 1 };
            report(&out, code)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|r| {
        let text = format!("{}\n", r.json);
        match &cli.output {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?,
            None => print!("{text}"),
        }
        Ok(r.code)
    });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("bsharp: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
