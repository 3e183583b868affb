use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use epiproj::bench::{run_bench, write_csv, Algorithm, Experiment, ExperimentSpec};
use epiproj::io::{parse_json_vector, read_vector, write_binary_vector, VectorFormat, SCHEMA_VERSION};
use epiproj::oracle::{corrupt_members, default_suite_members, run_property_suite};
use epiproj::{project, Catalog, Error, Method, ObjectiveKind, ProjectionResult, SolverConfig, StopRule};

#[derive(Parser)]
#[command(name = "epiproj", version, about = "Epigraph and level-set projections")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Project one point and print the result as JSON.
    Project(ProjectArgs),
    /// Run a seeded benchmark and print a CSV table.
    Bench(BenchArgs),
    /// Run the calculus property suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Epi,
    Level,
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    NewtonLs,
    NewtonFull,
    BisectionDeriv,
    BisectionWidth,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Binary,
}

#[derive(clap::Args)]
struct ProjectArgs {
    /// Catalog member, e.g. `l1`, `absbox:scale=2`, `neglog:n=3`.
    #[arg(long = "f")]
    function: String,
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    /// Inline JSON array.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "x_file")]
    x: Option<String>,
    /// Read the point from a file (`-` for stdin).
    #[arg(long)]
    x_file: Option<PathBuf>,
    /// Encoding of `--x-file`.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long, value_enum, default_value = "newton-ls")]
    solver: Solver,
    /// Stopping tolerance (|θ'| for Newton and derivative bisection, width for width bisection).
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    lambda0: Option<f64>,
    #[arg(long)]
    eps0: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Record every solver iterate.
    #[arg(long)]
    trace: bool,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the projected point as a binary vector.
    #[arg(long)]
    point_out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct BenchArgs {
    #[arg(long, value_parser = parse_experiment)]
    experiment: Experiment,
    /// Comma-separated dimensions (default: the preset's).
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Comma-separated standard deviations for l1ball.
    #[arg(long, value_delimiter = ',')]
    sigma: Vec<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated algorithm names.
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm)]
    algorithms: Vec<Algorithm>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Write the report as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Negative control: inflate every proximal point by this factor.
    #[arg(long, hide = true)]
    corrupt_prox: Option<f64>,
}

fn parse_experiment(s: &str) -> Result<Experiment, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Serialize)]
struct Versioned<'a, T> {
    schema_version: u32,
    #[serde(flatten)]
    body: &'a T,
}

fn output(path: Option<&PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn io_err(e: io::Error) -> Error {
    Error::Usage(format!("I/O error: {e}"))
}

fn cmd_project(a: ProjectArgs) -> Result<ExitCode, Error> {
    let f: Catalog = a.function.parse()?;
    let x = match (&a.x, &a.x_file) {
        (Some(s), None) => parse_json_vector(s)?,
        (None, Some(p)) => {
            let fmt = match a.format {
                Format::Json => VectorFormat::Json,
                Format::Binary => VectorFormat::Binary,
            };
            if p.as_os_str() == "-" {
                read_vector(io::stdin().lock(), fmt)?
            } else {
                let file = File::open(p).map_err(|e| Error::Usage(format!("{}: {e}", p.display())))?;
                read_vector(BufReader::new(file), fmt)?
            }
        }
        _ => return Err(Error::Usage("give exactly one of --x or --x-file".into())),
    };
    let kind = match a.mode {
        Mode::Epi => ObjectiveKind::Epi,
        Mode::Level => ObjectiveKind::Level,
    };
    let mut cfg = SolverConfig::default();
    if let Some(l) = a.lambda0 {
        cfg = cfg.with_lambda0(l);
    }
    if let Some(e) = a.eps0 {
        cfg = cfg.with_eps0(e);
    }
    if let Some(m) = a.max_iters {
        cfg.max_iters = m;
    }
    if a.trace {
        cfg = cfg.with_trace();
    }
    let method = match a.solver {
        Solver::NewtonLs => Method::NewtonLineSearch,
        Solver::NewtonFull => Method::NewtonFullStep,
        Solver::BisectionDeriv => Method::Bisection {
            rule: StopRule::DerivTol,
            tol: a.delta.unwrap_or(1e-12),
        },
        Solver::BisectionWidth => Method::Bisection {
            rule: StopRule::WidthTol,
            tol: a.delta.unwrap_or(1e-12),
        },
    };
    if let (Some(d), Method::NewtonLineSearch | Method::NewtonFullStep) = (a.delta, method) {
        cfg = cfg.with_delta(d);
    }
    cfg.validate()?;

    let result: ProjectionResult = project(kind, &f, &x, a.alpha, method, &cfg)?;
    let mut w = output(a.out.as_ref()).map_err(io_err)?;
    serde_json::to_writer_pretty(
        &mut w,
        &Versioned {
            schema_version: SCHEMA_VERSION,
            body: &result,
        },
    )
    .map_err(|e| Error::Usage(format!("cannot serialize result: {e}")))?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_err)?;
    if let Some(p) = &a.point_out {
        let file = File::create(p).map_err(io_err)?;
        write_binary_vector(BufWriter::new(file), &result.point).map_err(io_err)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(a: BenchArgs) -> Result<ExitCode, Error> {
    let mut spec = ExperimentSpec::preset(a.experiment);
    spec.seed = a.seed;
    if !a.n.is_empty() {
        spec.dimensions = a.n;
    }
    if !a.sigma.is_empty() {
        spec.sigmas = a.sigma;
    }
    if let Some(t) = a.trials {
        spec.trials = t;
        spec.large_trials = None;
    }
    if !a.algorithms.is_empty() {
        spec.algorithms = a.algorithms;
    }
    let rows = run_bench(&spec)?;
    let w = output(a.out.as_ref()).map_err(io_err)?;
    write_csv(&rows, w)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    seed: u64,
    trials: usize,
    passed: bool,
    properties: &'a [epiproj::oracle::PropertyReport],
}

fn cmd_verify(a: VerifyArgs) -> Result<ExitCode, Error> {
    let mut members = default_suite_members();
    if let Some(factor) = a.corrupt_prox {
        members = corrupt_members(members, factor);
    }
    let reports = run_property_suite(&members, a.seed, a.trials);
    let passed = reports.iter().all(|r| r.passed);
    {
        let stdout = io::stdout();
        let mut w = stdout.lock();
        for r in &reports {
            writeln!(
                w,
                "{:<4} {:<28} {:<22} worst_slack={:+.3e} samples={}",
                if r.passed { "ok" } else { "FAIL" },
                r.property,
                r.member,
                r.worst_slack,
                r.samples
            )
            .map_err(io_err)?;
        }
        writeln!(
            w,
            "{}",
            if passed {
                "all properties pass"
            } else {
                "property failures"
            }
        )
        .map_err(io_err)?;
    }
    if let Some(p) = &a.out {
        let body = VerifyReport {
            seed: a.seed,
            trials: a.trials,
            passed,
            properties: &reports,
        };
        let mut w = output(Some(p)).map_err(io_err)?;
        serde_json::to_writer_pretty(
            &mut w,
            &Versioned {
                schema_version: SCHEMA_VERSION,
                body: &body,
            },
        )
        .map_err(|e| Error::Usage(e.to_string()))?;
        w.flush().map_err(io_err)?;
    }
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: cannot configure {k} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Project(a) => cmd_project(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Usage(_) | Error::Unsupported(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
