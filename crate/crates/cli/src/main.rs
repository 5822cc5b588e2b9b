//! `pjones`: exact Jones polynomials from PD codes, Gauss codes or 3D
//! polylines.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jones_core::bench::{log2_slope, run_sweep, BenchConfig, BenchError, Mode, CSV_HEADER};
use jones_core::bracket::{jones, BracketError};
use jones_core::diagram::{parse_gauss, parse_pd, Diagram, DiagramError};
use jones_core::laurent::{LaurentPoly, PolyJson, Variable};
use jones_core::pairing::Pairing;
use jones_core::pipeline::{compute, default_depth, max_depth, PipelineError};
use jones_core::projection::{jones_open_with_workers, parse_xyz, project, Curve3D, OpenOptions, ProjectionError};
use jones_core::recombine::{RecombineError, RunOutput};
use jones_core::spectrum::{virtual_spectrum, SpectrumError};
use jones_core::subdivide::{subdivide, SubdivideError};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "pjones",
    version,
    about = "Exact parallel Jones polynomials of knots, linkoids and open curves"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the Jones polynomial and print it as JSON.
    Compute(RunArgs),
    /// Compare the parallel pipeline against serial enumeration.
    Verify(VerifyArgs),
    /// Time serial and parallel evaluation on a torus-link sweep.
    Bench(BenchArgs),
    /// Factor the polynomial through one piece of a subdivision.
    Spectrum(SpectrumArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Pd,
    Gauss,
    Xyz,
}

#[derive(Args, Clone, Debug)]
struct RunArgs {
    /// Input file, or `-` for standard input.
    #[arg(value_name = "INPUT", conflicts_with = "input")]
    path: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    /// Input format; guessed from the file extension when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Subdivision depth (2^m pieces). Defaults to ceil(log2 workers),
    /// lowered to fit the diagram.
    #[arg(long)]
    m: Option<u32>,
    /// Worker threads. Defaults to the machine's parallelism.
    #[arg(long, env = "PJONES_WORKERS")]
    workers: Option<usize>,
    /// Projection directions for 3D input.
    #[arg(long, default_value_t = 150)]
    samples: usize,
    /// Seed for bisection and direction sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output variable.
    #[arg(long = "var", default_value = "A", value_parser = parse_variable)]
    var: Variable,
    /// Closure permutation for open diagrams, as `a-b,c-d,...`.
    #[arg(long)]
    closure: Option<String>,
    /// Emit JSON (the default).
    #[arg(long)]
    json: bool,
}

#[derive(Args, Clone, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Perturbs the parallel result, to exercise the mismatch path.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args, Clone, Debug)]
struct BenchArgs {
    /// Crossing numbers to sweep, e.g. `10,12,14`.
    #[arg(long, value_delimiter = ',', default_values_t = [10, 12, 14, 16, 18])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    m: u32,
    #[arg(long, env = "PJONES_WORKERS", default_value_t = 2)]
    workers: usize,
    #[arg(long, default_value_t = 5)]
    repetitions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Emit CSV (the default).
    #[arg(long, conflicts_with = "json")]
    csv: bool,
    /// Emit JSON rows and the fitted serial slope instead of CSV.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Clone, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Piece to factor through, counting from 1.
    #[arg(long, default_value_t = 1)]
    piece: usize,
}

fn parse_variable(s: &str) -> Result<Variable, String> {
    s.parse()
}

/// Failure classes and their exit codes.
#[derive(Debug)]
enum Failure {
    Parse(String),
    Config(String),
    Invariant(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 1,
            Failure::Config(_) => 2,
            Failure::Invariant(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Parse(m) | Failure::Config(m) | Failure::Invariant(m) => m,
        }
    }
}

impl From<DiagramError> for Failure {
    fn from(e: DiagramError) -> Self {
        Failure::Parse(e.to_string())
    }
}

impl From<BracketError> for Failure {
    fn from(e: BracketError) -> Self {
        match e {
            BracketError::EmptyDiagram => Failure::Parse(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<SubdivideError> for Failure {
    fn from(e: SubdivideError) -> Self {
        match e {
            SubdivideError::InvalidPlan(_) => Failure::Invariant(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<RecombineError> for Failure {
    fn from(e: RecombineError) -> Self {
        match e {
            RecombineError::MissingClosure | RecombineError::DomainMismatch => Failure::Config(e.to_string()),
            RecombineError::Bracket(b) => b.into(),
            _ => Failure::Invariant(e.to_string()),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Subdivide(e) => e.into(),
            PipelineError::Recombine(e) => e.into(),
        }
    }
}

impl From<ProjectionError> for Failure {
    fn from(e: ProjectionError) -> Self {
        match e {
            ProjectionError::Parse { .. } | ProjectionError::Degenerate(_) | ProjectionError::Empty => {
                Failure::Parse(e.to_string())
            }
            ProjectionError::NoSamples | ProjectionError::DomainMismatch => Failure::Config(e.to_string()),
            ProjectionError::Subdivide(e) => e.into(),
            ProjectionError::Recombine(e) => e.into(),
            ProjectionError::AllRejected(_) | ProjectionError::Pool(_) => Failure::Invariant(e.to_string()),
        }
    }
}

impl From<SpectrumError> for Failure {
    fn from(e: SpectrumError) -> Self {
        match e {
            SpectrumError::Recombine(e) => e.into(),
            SpectrumError::Bracket(e) => e.into(),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Mismatch(_) | BenchError::Pool(_) => Failure::Invariant(e.to_string()),
            BenchError::Pipeline(e) => e.into(),
            BenchError::Bracket(e) => e.into(),
            _ => Failure::Config(e.to_string()),
        }
    }
}

enum Input {
    Diagram(Diagram),
    Curves(Vec<Curve3D>),
}

/// A validated configuration with its input loaded.
struct Run {
    input: Input,
    format: Format,
    m: Option<u32>,
    workers: usize,
    samples: usize,
    seed: u64,
    var: Variable,
    closure: Option<Pairing>,
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Parse(format!("reading standard input: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::Parse(format!("reading {}: {e}", path.display())))
    }
}

fn guess_format(path: &Path) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some("gauss") | Some("gc") => Format::Gauss,
        Some("xyz") | Some("txt") => Format::Xyz,
        _ => Format::Pd,
    }
}

impl Run {
    fn load(args: &RunArgs) -> Result<Run, Failure> {
        let path = args
            .input
            .clone()
            .or_else(|| args.path.clone())
            .ok_or_else(|| Failure::Config("no input given".into()))?;
        let workers = args
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        if workers == 0 {
            return Err(Failure::Config("workers must be at least 1".into()));
        }
        if args.samples == 0 {
            return Err(Failure::Config("samples must be at least 1".into()));
        }
        let closure = args
            .closure
            .as_deref()
            .map(|s| {
                s.parse::<Pairing>()
                    .map_err(|e| Failure::Config(format!("--closure: {e}")))
            })
            .transpose()?;
        let format = args.format.unwrap_or_else(|| guess_format(&path));
        let text = read_input(&path)?;
        let input = match format {
            Format::Pd => Input::Diagram(parse_pd(&text)?),
            Format::Gauss => Input::Diagram(parse_gauss(&text)?),
            Format::Xyz => Input::Curves(parse_xyz(&text)?),
        };
        Ok(Run {
            input,
            format,
            m: args.m,
            workers,
            samples: args.samples,
            seed: args.seed,
            var: args.var,
            closure,
        })
    }

    /// Depth for a diagram with `n` crossings: an explicit `--m` must fit,
    /// the default is lowered to fit.
    fn depth(&self, n: usize) -> u32 {
        self.m.unwrap_or_else(|| default_depth(self.workers).min(max_depth(n)))
    }

    fn sigma(&self, d: &Diagram) -> Result<Option<Pairing>, Failure> {
        match (&self.closure, d.is_closed()) {
            (None, true) => Ok(None),
            (None, false) => Err(BracketError::MissingClosure.into()),
            (Some(s), _) if !s.covers_exactly(d.endpoints()) => Err(BracketError::DomainMismatch.into()),
            (Some(s), true) if !s.is_empty() => Err(BracketError::DomainMismatch.into()),
            (Some(_), true) => Ok(None),
            (Some(s), false) => Ok(Some(s.clone())),
        }
    }

    fn open_options(&self) -> OpenOptions {
        OpenOptions {
            samples: self.samples,
            seed: self.seed,
            m: self.m.unwrap_or_else(|| default_depth(self.workers)),
            closure: self.closure.clone(),
            ..Default::default()
        }
    }

    fn format_name(&self) -> &'static str {
        match self.format {
            Format::Pd => "pd",
            Format::Gauss => "gauss",
            Format::Xyz => "xyz",
        }
    }
}

fn poly_json(p: &LaurentPoly, var: Variable) -> Value {
    serde_json::to_value(p.to_json_in(var)).expect("polynomial JSON")
}

fn to_value(p: PolyJson) -> Value {
    serde_json::to_value(p).expect("polynomial JSON")
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("JSON output"));
}

/// Runs the pipeline on a diagram and checks the Catalan bound on every
/// table of a closed input.
fn run_diagram(run: &Run, d: &Diagram, m: u32) -> Result<(RunOutput, f64), Failure> {
    let sigma = run.sigma(d)?;
    let t = Instant::now();
    let out = compute(d, sigma.as_ref(), m, run.workers, run.seed)?;
    let secs = t.elapsed().as_secs_f64();
    if d.is_closed() {
        if let Some(t) = out.stats.tables.iter().find(|t| !t.within_catalan_bound()) {
            return Err(Failure::Invariant(format!(
                "a table with {} strands has {} rows, over the Catalan bound",
                t.strands, t.rows
            )));
        }
    }
    Ok((out, secs))
}

fn diagram_metadata(run: &Run, d: &Diagram, out: &RunOutput, m: u32, secs: f64) -> Value {
    json!({
        "format": run.format_name(),
        "crossings": d.n_crossings(),
        "writhe": d.writhe(),
        "endpoints": d.endpoints(),
        "closure": run.closure.as_ref().map(|s| s.to_string()),
        "m": m,
        "workers": run.workers,
        "seed": run.seed,
        "piece_crossings": out.stats.piece_crossings,
        "piece_strands": out.stats.piece_strands,
        "max_table_rows": out.stats.max_rows(),
        "wall_seconds": secs,
    })
}

fn cmd_compute(args: &RunArgs) -> Result<(), Failure> {
    let run = Run::load(args)?;
    match &run.input {
        Input::Diagram(d) => {
            let m = run.depth(d.n_crossings());
            let (out, secs) = run_diagram(&run, d, m)?;
            print_json(&json!({
                "polynomial": poly_json(&out.polynomial, run.var),
                "metadata": diagram_metadata(&run, d, &out, m, secs),
            }));
        }
        Input::Curves(curves) => {
            let opts = run.open_options();
            let t = Instant::now();
            let r = jones_open_with_workers(curves, &opts, run.workers)?;
            let secs = t.elapsed().as_secs_f64();
            print_json(&json!({
                "polynomial": to_value(r.polynomial.to_json(run.var)),
                "metadata": {
                    "format": "xyz",
                    "curves": curves.len(),
                    "samples": run.samples,
                    "accepted": r.accepted,
                    "rejected": r.rejected,
                    "std_errors_A": r.std_errors,
                    "closure": r.closure,
                    "m": opts.m,
                    "workers": run.workers,
                    "seed": run.seed,
                    "wall_seconds": secs,
                },
            }));
        }
    }
    Ok(())
}

/// Terms where `a` and `b` differ, as `(exponent of A, a, b)`.
fn diff(a: &LaurentPoly, b: &LaurentPoly) -> Vec<(i64, String, String)> {
    let mut exps: Vec<i64> = a.terms().chain(b.terms()).map(|(e, _)| e).collect();
    exps.sort_unstable();
    exps.dedup();
    exps.into_iter()
        .filter(|&e| a.coeff(e) != b.coeff(e))
        .map(|e| (e, a.coeff(e).to_string(), b.coeff(e).to_string()))
        .collect()
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let run = Run::load(&args.run)?;
    let fault = |p: LaurentPoly| if args.inject_fault { &p + &LaurentPoly::one() } else { p };
    // Pairs of (serial, parallel) results to compare.
    let mut pairs = Vec::new();
    match &run.input {
        Input::Diagram(d) => {
            let sigma = run.sigma(d)?;
            let serial = jones(d, sigma.as_ref())?;
            let (out, _) = run_diagram(&run, d, run.depth(d.n_crossings()))?;
            pairs.push(("diagram".to_string(), serial, fault(out.polynomial)));
        }
        Input::Curves(curves) => {
            let opts = run.open_options();
            let r = jones_open_with_workers(curves, &opts, run.workers)?;
            for (i, (dir, parallel)) in r.directions.iter().zip(r.per_sample).enumerate() {
                let p = project(curves, *dir, opts.eps)
                    .map_err(|e| Failure::Invariant(format!("direction {i} no longer projects: {e:?}")))?;
                let sigma = match &opts.closure {
                    _ if p.diagram.is_closed() => None,
                    Some(s) => Some(s.clone()),
                    None => Some(p.diagram.strand_permutation().clone()),
                };
                let serial = jones(&p.diagram, sigma.as_ref())?;
                pairs.push((format!("direction {i}"), serial, fault(parallel)));
            }
        }
    }
    let mismatches: Vec<Value> = pairs
        .iter()
        .filter(|(_, s, p)| s != p)
        .map(|(what, s, p)| json!({ "case": what, "differing_terms_A": diff(s, p) }))
        .collect();
    print_json(&json!({
        "equal": mismatches.is_empty(),
        "cases": pairs.len(),
        "mismatches": mismatches,
        "polynomial": pairs.first().map(|(_, s, _)| poly_json(s, run.var)),
    }));
    if mismatches.is_empty() {
        Ok(())
    } else {
        Err(Failure::Invariant(format!(
            "{} of {} cases differ from serial enumeration",
            mismatches.len(),
            pairs.len()
        )))
    }
}

fn cmd_bench(args: &BenchArgs) -> Result<(), Failure> {
    if args.workers == 0 {
        return Err(Failure::Config("workers must be at least 1".into()));
    }
    let cfg = BenchConfig {
        sizes: args.sizes.clone(),
        m: args.m,
        workers: args.workers,
        repetitions: args.repetitions,
        seed: args.seed,
    };
    let rows = run_sweep(&cfg)?;
    if args.json {
        print_json(&json!({
            "rows": rows,
            "serial_log2_slope": log2_slope(&rows, Mode::Serial),
            "parallel_log2_slope": log2_slope(&rows, Mode::Parallel),
        }));
    } else {
        println!("{CSV_HEADER}");
        for r in &rows {
            println!("{}", r.to_csv());
        }
    }
    Ok(())
}

fn cmd_spectrum(args: &SpectrumArgs) -> Result<(), Failure> {
    let run = Run::load(&args.run)?;
    let Input::Diagram(d) = &run.input else {
        return Err(Failure::Config("spectrum needs a PD or Gauss diagram".into()));
    };
    if run.closure.is_some() || !d.is_closed() {
        return Err(SpectrumError::OpenDiagram.into());
    }
    let m = run.m.unwrap_or(1);
    if m == 0 {
        return Err(SpectrumError::NotSubdivided.into());
    }
    if args.piece == 0 {
        return Err(Failure::Config("pieces are numbered from 1".into()));
    }
    let plan = subdivide(d, m, run.seed)?;
    let s = virtual_spectrum(&plan, args.piece - 1)?;
    let (out, _) = run_diagram(&run, d, m)?;
    let equal = s.total == out.polynomial;
    let entries: Vec<Value> = s
        .entries
        .iter()
        .map(|e| {
            json!({
                "closure": e.closure.to_string(),
                "weight": poly_json(&e.weight, Variable::A),
                "piece_jones": poly_json(&e.piece_jones, run.var),
            })
        })
        .collect();
    print_json(&json!({
        "piece": args.piece,
        "piece_crossings": plan.pieces[args.piece - 1].n_crossings(),
        "piece_endpoints": plan.pieces[args.piece - 1].endpoints(),
        "complete": s.complete,
        "entries": entries,
        "total": poly_json(&s.total, run.var),
        "polynomial": poly_json(&out.polynomial, run.var),
        "equal": equal,
        "metadata": { "m": m, "seed": run.seed, "pieces": plan.pieces.len() },
    }));
    if equal {
        Ok(())
    } else {
        Err(Failure::Invariant(
            "weighted sum differs from the computed polynomial".into(),
        ))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Compute(a) => cmd_compute(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Spectrum(a) => cmd_spectrum(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("pjones: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
