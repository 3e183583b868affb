//! Seeded benchmark harness for the ℓ1-ball and sum-log epigraph experiments.
//!
//! Instances come from ChaCha8 streams: the cell key `(experiment, n, σ)` and
//! the seed pick the key, the trial index picks the stream. Every algorithm in
//! a cell sees the same instances, and adding or removing an algorithm does
//! not change them. Instances are generated in parallel; timing runs one
//! algorithm at a time on the calling thread.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, ProxFunction};
use crate::envelope::ObjectiveKind;
use crate::error::{Error, Result};
use crate::io::SCHEMA_VERSION;
use crate::projections::{l1_ball_sort_project, l1_ball_sort_threshold, project, Method, ProjectionResult};
use crate::solvers::{SolverConfig, StopRule};

/// Instances held in memory at once per cell, counted in coordinates.
const CHUNK_COORDS: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    /// Project `x ~ N(0, σ²I)` onto the unit ℓ1 ball.
    L1Ball,
    /// Project `(x, ᾱ)` onto the epigraph of `−Σ log`, with `x ~ U[−1,1]ⁿ` and
    /// `ᾱ ~ U[−2, −0.5]`.
    SumLogEpi,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::L1Ball => "l1ball",
            Experiment::SumLogEpi => "sumlog",
        })
    }
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1ball" => Ok(Experiment::L1Ball),
            "sumlog" => Ok(Experiment::SumLogEpi),
            _ => Err(Error::usage(format!(
                "unknown experiment '{s}' (expected l1ball or sumlog)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    NewtonFull,
    NewtonLs,
    BisectionDeriv,
    BisectionWidth,
    /// Sort-and-threshold; ℓ1 ball only.
    SortBaseline,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::NewtonFull,
        Algorithm::NewtonLs,
        Algorithm::BisectionDeriv,
        Algorithm::BisectionWidth,
        Algorithm::SortBaseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::NewtonFull => "newton_full",
            Algorithm::NewtonLs => "newton_ls",
            Algorithm::BisectionDeriv => "bisection_deriv",
            Algorithm::BisectionWidth => "bisection_width",
            Algorithm::SortBaseline => "sort_baseline",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::usage(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub dimensions: Vec<usize>,
    /// Gaussian standard deviations (ℓ1 ball only).
    pub sigmas: Vec<f64>,
    pub trials: usize,
    /// Trial count used instead of `trials` once `n ≥ 10⁶`.
    pub large_trials: Option<usize>,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
}

impl ExperimentSpec {
    pub fn preset(experiment: Experiment) -> Self {
        match experiment {
            Experiment::L1Ball => ExperimentSpec {
                experiment,
                dimensions: vec![20, 1_000, 1_000_000],
                sigmas: vec![0.1, 0.05, 0.01, 0.005],
                trials: 100_000,
                large_trials: Some(500),
                seed: 0,
                algorithms: vec![
                    Algorithm::NewtonFull,
                    Algorithm::BisectionWidth,
                    Algorithm::SortBaseline,
                ],
            },
            Experiment::SumLogEpi => ExperimentSpec {
                experiment,
                dimensions: vec![1, 1_000, 1_000_000],
                sigmas: Vec::new(),
                trials: 100_000,
                large_trials: Some(500),
                seed: 0,
                algorithms: vec![
                    Algorithm::NewtonFull,
                    Algorithm::BisectionDeriv,
                    Algorithm::BisectionWidth,
                ],
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimensions.is_empty() || self.dimensions.contains(&0) {
            return Err(Error::usage("dimensions must be a non-empty list of positive integers"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::usage("at least one algorithm is required"));
        }
        match self.experiment {
            Experiment::L1Ball => {
                if self.sigmas.is_empty() || self.sigmas.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
                    return Err(Error::usage("l1ball needs positive sigmas"));
                }
            }
            Experiment::SumLogEpi => {
                if self.algorithms.contains(&Algorithm::SortBaseline) {
                    return Err(Error::usage("sort_baseline only applies to l1ball"));
                }
            }
        }
        Ok(())
    }

    fn trials_for(&self, n: usize) -> usize {
        match self.large_trials {
            Some(t) if n >= 1_000_000 => t.min(self.trials),
            _ => self.trials,
        }
    }

    /// Per-algorithm method and solver settings.
    fn method(&self, alg: Algorithm, lambda0: f64) -> (Method, SolverConfig) {
        let base = SolverConfig::default().with_lambda0(lambda0).with_eps0(0.0);
        let (delta, deriv_tol) = match self.experiment {
            Experiment::L1Ball => (1e-15, 1e-15),
            Experiment::SumLogEpi => (1e-4, 1e-4),
        };
        match alg {
            Algorithm::NewtonFull => (Method::NewtonFullStep, base.with_delta(delta)),
            Algorithm::NewtonLs => (Method::NewtonLineSearch, base.with_delta(delta)),
            Algorithm::BisectionDeriv => (
                Method::Bisection {
                    rule: StopRule::DerivTol,
                    tol: deriv_tol,
                },
                base,
            ),
            Algorithm::BisectionWidth => (
                Method::Bisection {
                    rule: StopRule::WidthTol,
                    tol: 1e-8,
                },
                base,
            ),
            // unused
            Algorithm::SortBaseline => (Method::NewtonFullStep, base),
        }
    }

    fn reference(&self) -> Algorithm {
        for a in [Algorithm::SortBaseline, Algorithm::BisectionWidth] {
            if self.algorithms.contains(&a) {
                return a;
            }
        }
        self.algorithms[0]
    }
}

/// One `(experiment, n, σ, algorithm)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub schema_version: u32,
    pub experiment: Experiment,
    pub n: usize,
    pub sigma: Option<f64>,
    pub algorithm: Algorithm,
    pub trials: usize,
    pub mean_seconds: Option<f64>,
    /// Solver iterations; bracketing steps are not counted.
    pub mean_iterations: Option<f64>,
    /// `θ'` evaluations, bracketing included.
    pub mean_evaluations: Option<f64>,
    pub max_residual: Option<f64>,
    /// `max(‖p‖₁ − 1, 0)` for the ℓ1 ball, `max(f(p) − t, 0)` for the epigraph.
    pub max_violation: Option<f64>,
    /// `‖p − p_ref‖_∞`, worst over trials.
    pub agreement_point: Option<f64>,
    /// `|λ* − λ*_ref|`, worst over trials.
    pub agreement_lambda: Option<f64>,
    pub failures: usize,
    pub note: String,
}

#[derive(Clone, Debug)]
struct Instance {
    x: Vec<f64>,
    alpha: f64,
    lambda0: f64,
}

#[derive(Clone, Debug)]
struct Outcome {
    point: Vec<f64>,
    lambda: f64,
    iterations: usize,
    evaluations: usize,
    residual: f64,
    violation: f64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn cell_key(seed: u64, experiment: Experiment, n: usize, sigma: f64) -> u64 {
    let tag = match experiment {
        Experiment::L1Ball => 1,
        Experiment::SumLogEpi => 2,
    };
    splitmix(splitmix(splitmix(seed ^ tag) ^ n as u64) ^ sigma.to_bits())
}

/// Largest `|xᵢ|` over `⌈√n · ln n⌉` coordinates drawn without replacement;
/// the full-vector maximum when that sample is empty or all zero.
pub fn l1_lambda0<R: Rng + ?Sized>(x: &[f64], rng: &mut R) -> f64 {
    let n = x.len();
    let k = (((n as f64).sqrt() * (n as f64).ln()).ceil() as usize).min(n);
    let sampled = if k == 0 {
        0.0
    } else {
        sample(rng, n, k).iter().map(|i| x[i].abs()).fold(0.0, f64::max)
    };
    if sampled > 0.0 {
        sampled
    } else {
        x.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

fn make_instance(spec: &ExperimentSpec, key: u64, trial: usize, n: usize, sigma: f64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(trial as u64);
    let mut x = Vec::new();
    x.try_reserve_exact(n)
        .map_err(|_| Error::Numeric(format!("cannot allocate an instance of size {n}")))?;
    match spec.experiment {
        Experiment::L1Ball => {
            let normal = Normal::new(0.0, sigma).map_err(|e| Error::usage(e.to_string()))?;
            x.extend((0..n).map(|_| normal.sample(&mut rng)));
            let mut lambda0 = l1_lambda0(&x, &mut rng);
            if lambda0 <= 0.0 {
                lambda0 = 1.0;
            }
            Ok(Instance { x, alpha: 1.0, lambda0 })
        }
        Experiment::SumLogEpi => {
            let coord = Uniform::new(-1.0, 1.0).map_err(|e| Error::usage(e.to_string()))?;
            let level = Uniform::new(-2.0, -0.5).map_err(|e| Error::usage(e.to_string()))?;
            x.extend((0..n).map(|_| coord.sample(&mut rng)));
            let alpha = level.sample(&mut rng);
            Ok(Instance {
                x,
                alpha,
                lambda0: (n as f64).sqrt(),
            })
        }
    }
}

fn run_one(spec: &ExperimentSpec, alg: Algorithm, inst: &Instance) -> Result<Outcome> {
    let n = inst.x.len();
    match (spec.experiment, alg) {
        (Experiment::L1Ball, Algorithm::SortBaseline) => {
            let tau = l1_ball_sort_threshold(&inst.x, 1.0)?;
            let point = l1_ball_sort_project(&inst.x, 1.0)?;
            let norm: f64 = point.iter().map(|v| v.abs()).sum();
            Ok(Outcome {
                residual: if tau > 0.0 { (norm - 1.0).abs() } else { 0.0 },
                violation: (norm - 1.0).max(0.0),
                point,
                lambda: tau,
                iterations: 0,
                evaluations: 0,
            })
        }
        (Experiment::L1Ball, _) => {
            let (method, cfg) = spec.method(alg, inst.lambda0);
            let f = Catalog::l1().with_dim(n);
            let r = project(ObjectiveKind::Level, &f, &inst.x, 1.0, method, &cfg)?;
            let norm: f64 = r.point.iter().map(|v| v.abs()).sum();
            Ok(outcome(r, (norm - 1.0).max(0.0)))
        }
        (Experiment::SumLogEpi, _) => {
            let (method, cfg) = spec.method(alg, inst.lambda0);
            let f = Catalog::neg_log().with_dim(n);
            let r = project(ObjectiveKind::Epi, &f, &inst.x, inst.alpha, method, &cfg)?;
            let fp = f.eval(&r.point)?.to_f64();
            let t = r.ordinate.unwrap_or(inst.alpha);
            Ok(outcome(r, (fp - t).max(0.0)))
        }
    }
}

fn outcome(r: ProjectionResult, violation: f64) -> Outcome {
    let (iterations, evaluations) = r.solver.as_ref().map_or((0, 0), |s| (s.iterations, s.evaluations));
    Outcome {
        point: r.point,
        lambda: r.lambda_star,
        iterations,
        evaluations,
        residual: r.residual,
        violation,
    }
}

#[derive(Default)]
struct Acc {
    seconds: f64,
    iterations: f64,
    evaluations: f64,
    ok: usize,
    failures: usize,
    max_residual: f64,
    max_violation: f64,
    agree_point: f64,
    agree_lambda: f64,
    first_error: Option<String>,
}

/// Runs every cell of `spec`. `trials = 0` yields an empty table.
pub fn run_bench(spec: &ExperimentSpec) -> Result<Vec<BenchRow>> {
    spec.validate()?;
    let mut rows = Vec::new();
    if spec.trials == 0 {
        return Ok(rows);
    }
    let sigmas: Vec<Option<f64>> = match spec.experiment {
        Experiment::L1Ball => spec.sigmas.iter().copied().map(Some).collect(),
        Experiment::SumLogEpi => vec![None],
    };
    let reference = spec.reference();
    let compare = spec.algorithms.len() >= 2;

    for &n in &spec.dimensions {
        for &sigma in &sigmas {
            let trials = spec.trials_for(n);
            let key = cell_key(spec.seed, spec.experiment, n, sigma.unwrap_or(0.0));
            let mut acc: Vec<Acc> = spec.algorithms.iter().map(|_| Acc::default()).collect();
            let chunk = (CHUNK_COORDS / n).max(1);
            let mut diagnostic = None;

            let mut start = 0;
            while start < trials && diagnostic.is_none() {
                let end = (start + chunk).min(trials);
                let instances: Result<Vec<Instance>> = (start..end)
                    .into_par_iter()
                    .map(|t| make_instance(spec, key, t, n, sigma.unwrap_or(0.0)))
                    .collect();
                let instances = match instances {
                    Ok(v) => v,
                    Err(e) => {
                        diagnostic = Some(e.to_string());
                        break;
                    }
                };
                for inst in &instances {
                    let ref_out = if compare {
                        run_one(spec, reference, inst).ok()
                    } else {
                        None
                    };
                    for (a, &alg) in acc.iter_mut().zip(&spec.algorithms) {
                        let t0 = Instant::now();
                        let out = run_one(spec, alg, inst);
                        let secs = t0.elapsed().as_secs_f64().max(1e-9);
                        match out {
                            Ok(o) => {
                                a.seconds += secs;
                                a.iterations += o.iterations as f64;
                                a.evaluations += o.evaluations as f64;
                                a.ok += 1;
                                a.max_residual = a.max_residual.max(o.residual);
                                a.max_violation = a.max_violation.max(o.violation);
                                if let Some(r) = &ref_out {
                                    let dp = o
                                        .point
                                        .iter()
                                        .zip(&r.point)
                                        .map(|(p, q)| (p - q).abs())
                                        .fold(0.0, f64::max);
                                    a.agree_point = a.agree_point.max(dp);
                                    a.agree_lambda = a.agree_lambda.max((o.lambda - r.lambda).abs());
                                }
                            }
                            Err(e) => {
                                a.failures += 1;
                                a.first_error.get_or_insert_with(|| e.to_string());
                            }
                        }
                    }
                }
                start = end;
            }

            for (a, &alg) in acc.into_iter().zip(&spec.algorithms) {
                let mut row = BenchRow {
                    schema_version: SCHEMA_VERSION,
                    experiment: spec.experiment,
                    n,
                    sigma,
                    algorithm: alg,
                    trials: a.ok + a.failures,
                    mean_seconds: None,
                    mean_iterations: None,
                    mean_evaluations: None,
                    max_residual: None,
                    max_violation: None,
                    agreement_point: None,
                    agreement_lambda: None,
                    failures: a.failures,
                    note: String::new(),
                };
                if let Some(d) = &diagnostic {
                    row.note = format!("skipped: {d}");
                } else if a.ok > 0 {
                    let k = a.ok as f64;
                    row.mean_seconds = Some(a.seconds / k);
                    if alg != Algorithm::SortBaseline {
                        row.mean_iterations = Some(a.iterations / k);
                        row.mean_evaluations = Some(a.evaluations / k);
                    }
                    row.max_residual = Some(a.max_residual);
                    row.max_violation = Some(a.max_violation);
                    if compare {
                        row.agreement_point = Some(a.agree_point);
                        row.agreement_lambda = Some(a.agree_lambda);
                    }
                }
                if let Some(e) = a.first_error {
                    row.note = format!("{} failures; first: {e}", a.failures);
                }
                if alg == reference && compare && row.note.is_empty() {
                    row.note = "reference".into();
                }
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

/// Writes the rows as CSV with a header line.
pub fn write_csv<W: Write>(rows: &[BenchRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "schema_version",
        "experiment",
        "n",
        "sigma",
        "algorithm",
        "trials",
        "mean_seconds",
        "mean_iterations",
        "mean_evaluations",
        "max_residual",
        "max_violation",
        "agreement_point",
        "agreement_lambda",
        "failures",
        "note",
    ])
    .map_err(csv_err)?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.schema_version.to_string(),
            r.experiment.to_string(),
            r.n.to_string(),
            r.sigma.map(|s| s.to_string()).unwrap_or_else(|| "-".into()),
            r.algorithm.to_string(),
            r.trials.to_string(),
            opt(r.mean_seconds),
            opt(r.mean_iterations),
            opt(r.mean_evaluations),
            opt(r.max_residual),
            opt(r.max_violation),
            opt(r.agreement_point),
            opt(r.agreement_lambda),
            r.failures.to_string(),
            r.note.clone(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::usage(format!("cannot write CSV: {e}")))?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::usage(format!("cannot write CSV: {e}"))
}
