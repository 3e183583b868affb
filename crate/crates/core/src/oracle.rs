//! Brute-force oracles and the calculus property suite.
//!
//! The oracles only ever call [`ProxFunction::eval`]; they never touch the
//! closed-form proximal maps or the root solvers they are used to check.
//!
//! * One-dimensional problems are minimized over a uniform grid; the result is
//!   accurate to one grid cell because every objective involved is convex.
//! * Two-dimensional proximal and epigraph problems use a coarse grid to find a
//!   point of the domain, then a nested golden-section search over the whole
//!   search box. Partial minimization of a jointly convex function is convex,
//!   so both levels are unimodal. The anchoring assumes `dom f` is a product of
//!   intervals, which holds for every catalog member.
//! * Two-dimensional level-set projections are parametrized by angle around a
//!   strictly feasible point: the boundary radius along each ray is found by
//!   bisection on `f(ĉ + r·d) ≤ ᾱ`, then the distance to `x̄` is minimized over
//!   the angle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{sq_dist, Catalog, ProxFunction};
use crate::envelope::{envelope_gradient, moreau_envelope, phi_bar, ScalarObjective};
use crate::error::{Error, Result};
use crate::extended::ExtReal;

const GOLDEN_ITERS: usize = 120;
const RAY_ANGLES: usize = 20_000;
const RAY_BISECTIONS: usize = 64;

/// Axis-aligned search box and grid resolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// `[lo, hi]` per coordinate.
    pub bounds: Vec<(f64, f64)>,
    /// Points per axis.
    pub resolution: usize,
}

impl GridSpec {
    pub fn new(bounds: Vec<(f64, f64)>, resolution: usize) -> Result<Self> {
        let g = GridSpec { bounds, resolution };
        g.validate()?;
        Ok(g)
    }

    /// `10⁶` points for `n = 1`, `2·10³` per axis for `n = 2`.
    pub fn default_resolution(n: usize) -> usize {
        if n == 1 {
            1_000_000
        } else {
            2_000
        }
    }

    /// The box `x ± radius` with the default resolution.
    pub fn centered(x: &[f64], radius: f64) -> Result<Self> {
        let bounds = x.iter().map(|&c| (c - radius, c + radius)).collect();
        GridSpec::new(bounds, GridSpec::default_resolution(x.len()))
    }

    pub fn with_resolution(mut self, resolution: usize) -> Result<Self> {
        self.resolution = resolution;
        self.validate()?;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    /// Grid spacing along axis `i`.
    pub fn cell(&self, i: usize) -> f64 {
        let (lo, hi) = self.bounds[i];
        (hi - lo) / (self.resolution - 1) as f64
    }

    fn validate(&self) -> Result<()> {
        if self.resolution < 2 {
            return Err(Error::usage("grid resolution must be at least 2"));
        }
        if self.bounds.is_empty() {
            return Err(Error::usage("grid needs at least one axis"));
        }
        for &(lo, hi) in &self.bounds {
            if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                return Err(Error::usage(format!("invalid grid interval [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    fn check_supported(&self, n: usize) -> Result<()> {
        if n != self.dim() {
            return Err(Error::usage(format!("grid has {} axes, point has {n}", self.dim())));
        }
        if n > 2 {
            return Err(Error::Unsupported(format!("brute-force oracles need n ≤ 2, got {n}")));
        }
        Ok(())
    }

    fn axis(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        let (lo, hi) = self.bounds[i];
        let m = self.resolution - 1;
        (0..=m).map(move |k| lo + (hi - lo) * (k as f64 / m as f64))
    }

    /// Search box for `P_λ f(x)`, from an a priori bound per catalog member:
    ///
    /// * full-domain members and the box families: with `u₀` the domain
    ///   projection, `‖P_λ f(x) − x‖ ≤ ‖x − u₀‖ + √(2λ(f(u₀) − inf f))`;
    /// * `neglog`: `y(y − x) = λ` forces `0 < y ≤ max(x, 0) + √λ` per coordinate;
    /// * `negsqrt` at 0: `y^{3/2} = λ/2` gives `y ≤ λ + 1`.
    pub fn for_prox(member: &Catalog, x: &[f64], lambda: f64) -> Result<Self> {
        let res = GridSpec::default_resolution(x.len());
        match member {
            Catalog::NegLog { .. } => {
                let b = x.iter().map(|&xi| (0.0, xi.max(0.0) + lambda.sqrt() + 1e-3)).collect();
                GridSpec::new(b, res)
            }
            Catalog::NegSqrt => GridSpec::new(vec![(0.0, lambda + 1.0)], res),
            _ => {
                let dp = member.domain_projection(x)?;
                let fu0 = dp.value.to_f64();
                let inf = member.infimum().unwrap_or(0.0);
                let r = sq_dist(x, &dp.point).sqrt() + (2.0 * lambda * (fu0 - inf)).sqrt();
                GridSpec::centered(x, 1.01 * r + 1e-3).map(|g| GridSpec { resolution: res, ..g })
            }
        }
    }

    /// Search box for the epigraph projection of `(x, α)`: the ball around `x`
    /// whose radius is the distance to a known point of `epi f`.
    pub fn for_epigraph(member: &Catalog, x: &[f64], alpha: f64) -> Result<Self> {
        let dp = member.domain_projection(x)?;
        let u0 = if dp.value.is_finite() {
            dp.point
        } else {
            member.prox(x, 1.0)?.point
        };
        let fu0 = member.eval(&u0)?.to_f64();
        let r = (sq_dist(x, &u0) + (fu0.max(alpha) - alpha).powi(2)).sqrt();
        GridSpec::centered(x, 1.01 * r + 1e-3)
    }

    /// Search box for the level-set projection of `x`, built from a strictly
    /// feasible witness.
    pub fn for_level(member: &Catalog, x: &[f64], alpha: f64) -> Result<Self> {
        let w = member
            .level_witness(alpha, x.len())
            .ok_or_else(|| Error::Infeasible(format!("{member} has no point below {alpha}")))?;
        let r = sq_dist(x, &w).sqrt();
        GridSpec::centered(x, 1.01 * r + 1e-3)
    }
}

/// Golden-section search for the minimizer of a convex extended-valued function
/// on `[a, b]`. `anchor` must be a point where `g` is finite; it steers the
/// search when both probes land outside the domain.
fn golden_min(g: &mut dyn FnMut(f64) -> f64, mut a: f64, mut b: f64, mut anchor: f64) -> (f64, f64) {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut best = (anchor, g(anchor));
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut gc = g(c);
    let mut gd = g(d);
    for _ in 0..GOLDEN_ITERS {
        for (u, v) in [(c, gc), (d, gd)] {
            if v < best.1 {
                best = (u, v);
                anchor = u;
            }
        }
        if gc.is_infinite() && gd.is_infinite() {
            if anchor < c {
                b = c;
            } else if anchor > d {
                a = d;
            } else {
                a = c;
                b = d;
            }
            c = b - inv_phi * (b - a);
            d = a + inv_phi * (b - a);
            gc = g(c);
            gd = g(d);
            continue;
        }
        if gc <= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
    }
    let mid = 0.5 * (a + b);
    let gm = g(mid);
    if gm <= best.1 {
        (mid, gm)
    } else {
        best
    }
}

fn ext(v: ExtReal) -> f64 {
    v.to_f64()
}

/// Minimizes a convex objective over the grid, then (for `n = 2`) polishes by
/// nested golden-section search over the whole box.
fn minimize_convex(grid: &GridSpec, obj: &(dyn Fn(&[f64]) -> f64 + Sync)) -> Result<Vec<f64>> {
    let coarse = grid_argmin(grid, obj)?;
    if grid.dim() == 1 {
        return Ok(coarse);
    }
    let (lo1, hi1) = grid.bounds[0];
    let (lo2, hi2) = grid.bounds[1];
    let anchor2 = coarse[1];
    let inner_arg = |u1: f64| -> (f64, f64) {
        let mut h = |u2: f64| obj(&[u1, u2]);
        golden_min(&mut h, lo2, hi2, anchor2)
    };
    let mut outer = |u1: f64| inner_arg(u1).1;
    let (u1, _) = golden_min(&mut outer, lo1, hi1, coarse[0]);
    let (u2, _) = inner_arg(u1);
    Ok(vec![u1, u2])
}

fn grid_argmin(grid: &GridSpec, obj: &(dyn Fn(&[f64]) -> f64 + Sync)) -> Result<Vec<f64>> {
    let mut best = (f64::INFINITY, Vec::new());
    match grid.dim() {
        1 => {
            for u in grid.axis(0) {
                let v = obj(&[u]);
                if v < best.0 {
                    best = (v, vec![u]);
                }
            }
        }
        2 => {
            let ys: Vec<f64> = grid.axis(1).collect();
            let rows: Vec<(f64, Vec<f64>)> = grid
                .axis(0)
                .collect::<Vec<_>>()
                .par_iter()
                .map(|&u1| {
                    let mut rb = (f64::INFINITY, Vec::new());
                    for &u2 in &ys {
                        let v = obj(&[u1, u2]);
                        if v < rb.0 {
                            rb = (v, vec![u1, u2]);
                        }
                    }
                    rb
                })
                .collect();
            for r in rows {
                if r.0 < best.0 {
                    best = r;
                }
            }
        }
        n => return Err(Error::Unsupported(format!("grid search needs n ≤ 2, got {n}"))),
    }
    if best.1.is_empty() {
        return Err(Error::Numeric("objective is +∞ on the whole grid".into()));
    }
    Ok(best.1)
}

/// Direct minimization of `f(u) + ‖x − u‖²/2λ`.
pub fn grid_prox<F: ProxFunction + ?Sized>(f: &F, x: &[f64], lambda: f64, grid: &GridSpec) -> Result<Vec<f64>> {
    grid.check_supported(x.len())?;
    if !(lambda > 0.0) {
        return Err(Error::usage("λ must be positive"));
    }
    let obj = |u: &[f64]| match f.eval(u) {
        Ok(ExtReal::Finite(v)) => v + sq_dist(x, u) / (2.0 * lambda),
        _ => f64::INFINITY,
    };
    minimize_convex(grid, &obj)
}

/// Direct minimization of `‖u − x‖² + (max(f(u), ᾱ) − ᾱ)²`; returns the point and
/// the ordinate `max(f(u*), ᾱ)`.
pub fn brute_epi_project<F: ProxFunction + ?Sized>(
    f: &F,
    x: &[f64],
    alpha: f64,
    grid: &GridSpec,
) -> Result<(Vec<f64>, f64)> {
    grid.check_supported(x.len())?;
    let obj = |u: &[f64]| match f.eval(u) {
        Ok(ExtReal::Finite(v)) => sq_dist(x, u) + (v.max(alpha) - alpha).powi(2),
        _ => f64::INFINITY,
    };
    let u = minimize_convex(grid, &obj)?;
    let t = ext(f.eval(&u)?).max(alpha);
    Ok((u, t))
}

/// Nearest point of `{f ≤ ᾱ}` to `x`.
pub fn brute_level_project<F: ProxFunction + ?Sized>(
    f: &F,
    x: &[f64],
    alpha: f64,
    grid: &GridSpec,
) -> Result<Vec<f64>> {
    grid.check_supported(x.len())?;
    if f.eval(x)?.le(alpha) {
        return Ok(x.to_vec());
    }
    if grid.dim() == 1 {
        let obj = |u: &[f64]| {
            if f.eval(u).map(|v| v.le(alpha)).unwrap_or(false) {
                (u[0] - x[0]).abs()
            } else {
                f64::INFINITY
            }
        };
        return grid_argmin(grid, &obj);
    }

    // strictly feasible center from the grid
    let fval = |u: &[f64]| f.eval(u).map(ext).unwrap_or(f64::INFINITY);
    let center = grid_argmin(grid, &fval)?;
    if !(fval(&center) < alpha) {
        return Err(Error::Infeasible(format!("no grid point with f < {alpha}")));
    }
    let r_max = 2.0 * sq_dist(x, &center).sqrt() + 1.0;
    let boundary = |phi: f64| -> [f64; 2] {
        let d = [phi.cos(), phi.sin()];
        let at = |r: f64| [center[0] + r * d[0], center[1] + r * d[1]];
        let (mut lo, mut hi) = (0.0, r_max);
        if fval(&at(hi)) <= alpha {
            return at(hi);
        }
        for _ in 0..RAY_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if fval(&at(mid)) <= alpha {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(lo)
    };
    let dist = |phi: f64| sq_dist(x, &boundary(phi)).sqrt();
    let step = std::f64::consts::TAU / RAY_ANGLES as f64;
    let (best_phi, _) = (0..RAY_ANGLES)
        .into_par_iter()
        .map(|k| {
            let phi = k as f64 * step;
            (phi, dist(phi))
        })
        .reduce(|| (0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let mut g = |phi: f64| dist(phi);
    let (phi, _) = golden_min(&mut g, best_phi - step, best_phi + step, best_phi);
    Ok(boundary(phi).to_vec())
}

/// Central difference `(g(λ+h) − g(λ−h)) / 2h`.
pub fn finite_diff<G>(mut g: G, lambda: f64, h: f64) -> Result<f64>
where
    G: FnMut(f64) -> Result<ExtReal>,
{
    if !(h > 0.0) {
        return Err(Error::usage("step must be positive"));
    }
    let hi = g(lambda + h)?;
    let lo = g(lambda - h)?;
    match (hi, lo) {
        (ExtReal::Finite(a), ExtReal::Finite(b)) if a.is_finite() && b.is_finite() => Ok((a - b) / (2.0 * h)),
        _ => Err(Error::Numeric(format!(
            "non-finite evaluation on [{}, {}]",
            lambda - h,
            lambda + h
        ))),
    }
}

// ---------------------------------------------------------------------------
// property suite

/// Outcome of one property over one member.
///
/// `worst_slack` is the smallest `allowed − observed` margin over all samples;
/// the property passes when it is at least `-tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: String,
    pub member: String,
    pub passed: bool,
    pub worst_slack: f64,
    pub tolerance: f64,
    pub samples: usize,
}

/// A function under test together with the catalog entry that describes its
/// domain (used for sampling).
pub struct SuiteMember {
    pub label: String,
    pub shape: Catalog,
    pub dim: usize,
    pub function: Box<dyn ProxFunction>,
}

impl SuiteMember {
    pub fn new(shape: Catalog, dim: usize) -> Self {
        let shape = shape.with_dim(dim);
        SuiteMember {
            label: shape.to_string(),
            function: Box::new(shape.clone()),
            shape,
            dim,
        }
    }

    /// Replaces the function with `function`, keeping the sampling shape.
    pub fn replace_function(mut self, function: Box<dyn ProxFunction>, label: impl Into<String>) -> Self {
        self.function = function;
        self.label = label.into();
        self
    }

    fn origin_only(&self) -> bool {
        !self.shape.accepts_any_base_point()
    }

    fn sample_base(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        if self.origin_only() {
            return vec![0.0; self.dim];
        }
        (0..self.dim).map(|_| rng.random_range(-2.0..2.0)).collect()
    }

    /// A point of `dom f` whose coordinates stay away from the domain boundary.
    fn sample_interior(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self.shape {
            Catalog::NegSqrt => vec![0.0],
            Catalog::NegLog { .. } => (0..self.dim).map(|_| rng.random_range(0.1..2.0)).collect(),
            Catalog::Box { .. } | Catalog::AbsBox { .. } => {
                (0..self.dim).map(|_| rng.random_range(-0.95..0.95)).collect()
            }
            _ => self.sample_base(rng),
        }
    }
}

/// The members exercised by `verify` by default.
pub fn default_suite_members() -> Vec<SuiteMember> {
    vec![
        SuiteMember::new(Catalog::l1(), 3),
        SuiteMember::new(Catalog::L1 { scale: 0.5, dim: None }, 2),
        SuiteMember::new(Catalog::Box { dim: None }, 2),
        SuiteMember::new(Catalog::abs_box(1.0), 1),
        SuiteMember::new(Catalog::abs_box(2.0), 2),
        SuiteMember::new(Catalog::neg_log(), 1),
        SuiteMember::new(Catalog::neg_log(), 3),
        SuiteMember::new(Catalog::NegSqrt, 1),
        SuiteMember::new(Catalog::half_square(), 3),
    ]
}

/// Negative-control wrapper: inflates every proximal point by a fixed factor.
#[doc(hidden)]
pub struct CorruptedProx<F> {
    pub inner: F,
    pub factor: f64,
}

impl<F: ProxFunction> ProxFunction for CorruptedProx<F> {
    fn descriptor(&self) -> String {
        format!("corrupted({})", self.inner.descriptor())
    }
    fn dimension(&self) -> Option<usize> {
        self.inner.dimension()
    }
    fn infimum(&self) -> Option<f64> {
        self.inner.infimum()
    }
    fn eval(&self, u: &[f64]) -> Result<ExtReal> {
        self.inner.eval(u)
    }
    fn prox_into(&self, x: &[f64], lambda: f64, out: &mut [f64]) -> Result<ExtReal> {
        self.inner.prox_into(x, lambda, out)?;
        for o in out.iter_mut() {
            *o *= self.factor;
        }
        self.inner.eval(out)
    }
    fn domain_projection_into(&self, x: &[f64], out: &mut [f64]) -> Result<ExtReal> {
        self.inner.domain_projection_into(x, out)
    }
    fn prox_value_slope(&self, x: &[f64], lambda: f64) -> Result<f64> {
        self.inner.prox_value_slope(x, lambda)
    }
}

/// Wraps every member in [`CorruptedProx`].
#[doc(hidden)]
pub fn corrupt_members(members: Vec<SuiteMember>, factor: f64) -> Vec<SuiteMember> {
    members
        .into_iter()
        .map(|m| {
            let label = format!("corrupted({})", m.label);
            let f = CorruptedProx {
                inner: m.shape.clone(),
                factor,
            };
            m.replace_function(Box::new(f), label)
        })
        .collect()
}

/// Names of the properties, in report order.
pub const PROPERTIES: &[&str] = &[
    "phi_bar_derivative",
    "envelope_gradient_fd",
    "key_lemma_bound1",
    "key_lemma_bound2",
    "eta_monotone",
    "prox_distance_monotone",
    "envelope_limit",
    "prox_nonexpansive",
    "epi_bsub_floor",
    "level_bsub_nonneg",
    "theta_derivative_monotone",
    "envelope_remainder",
    "prox_domain_limit",
    "sqrt_lambda_exactness",
    "grid_prox_agreement",
];

struct Tally {
    worst: f64,
    samples: usize,
}

impl Tally {
    fn new() -> Self {
        Tally {
            worst: f64::INFINITY,
            samples: 0,
        }
    }

    fn push(&mut self, slack: f64) {
        // NaN slack counts as a failure
        self.worst = if slack.is_nan() {
            f64::NEG_INFINITY
        } else {
            self.worst.min(slack)
        };
        self.samples += 1;
    }
}

fn cell_rng(seed: u64, property: usize, member: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((property as u64) << 32) | member as u64);
    rng
}

/// Runs every property in [`PROPERTIES`] over every member.
///
/// Cells run in parallel; each has its own random stream derived from
/// `(seed, property, member)`, and reports come back in `(property, member)`
/// order, so the output depends only on the inputs.
pub fn run_property_suite(members: &[SuiteMember], seed: u64, trials: usize) -> Vec<PropertyReport> {
    let cells: Vec<(usize, usize)> = (0..PROPERTIES.len())
        .flat_map(|p| (0..members.len()).map(move |m| (p, m)))
        .collect();
    cells
        .par_iter()
        .filter_map(|&(p, m)| {
            let member = &members[m];
            let mut rng = cell_rng(seed, p, m);
            let (tally, tol) = run_property(PROPERTIES[p], member, &mut rng, trials.max(1))?;
            Some(PropertyReport {
                property: PROPERTIES[p].to_string(),
                member: member.label.clone(),
                passed: tally.samples > 0 && tally.worst >= -tol,
                worst_slack: tally.worst,
                tolerance: tol,
                samples: tally.samples,
            })
        })
        .collect()
}

/// Returns `None` when the property does not apply to the member.
fn run_property(name: &str, m: &SuiteMember, rng: &mut ChaCha8Rng, trials: usize) -> Option<(Tally, f64)> {
    let f = m.function.as_ref();
    let mut t = Tally::new();
    // Evaluation errors become failing samples.
    let fail = f64::NEG_INFINITY;
    let tol = match name {
        "phi_bar_derivative" => {
            for _ in 0..trials {
                let x = m.sample_base(rng);
                let lam = rng.random_range(0.1..3.0);
                let eta = match f.prox_summary(&x, lam) {
                    Ok(s) => s.value,
                    Err(_) => {
                        t.push(fail);
                        continue;
                    }
                };
                for h in [1e-3, 1e-4, 1e-5] {
                    let slack = finite_diff(|l| phi_bar(f, &x, l), lam, h)
                        .map(|d| 10.0 * h - (d + eta).abs())
                        .unwrap_or(fail);
                    t.push(slack);
                }
            }
            0.0
        }
        "envelope_gradient_fd" => {
            if m.origin_only() {
                return None;
            }
            let h = 1e-6;
            for _ in 0..trials {
                let x = m.sample_base(rng);
                let lam = rng.random_range(0.1..3.0);
                let slack = (|| -> Result<f64> {
                    let grad = envelope_gradient(f, &x, lam)?;
                    let mut worst = f64::INFINITY;
                    for i in 0..x.len() {
                        let mut xp = x.clone();
                        let mut xm = x.clone();
                        xp[i] += h;
                        xm[i] -= h;
                        let fd = (moreau_envelope(f, &xp, lam)? - moreau_envelope(f, &xm, lam)?) / (2.0 * h);
                        worst = worst.min(1e-5 - (fd - grad[i]).abs());
                    }
                    Ok(worst)
                })()
                .unwrap_or(fail);
                t.push(slack);
            }
            0.0
        }
        "key_lemma_bound1" | "key_lemma_bound2" => {
            for _ in 0..trials {
                let x = m.sample_base(rng);
                let a = rng.random_range(0.05..4.0);
                let b = rng.random_range(0.05..4.0);
                let (lam, mu) = if a <= b { (a, b) } else { (b, a) };
                let slack = (|| -> Result<f64> {
                    let pl = f.prox(&x, lam)?;
                    let pm = f.prox(&x, mu)?;
                    let dl = sq_dist(&pl.point, &x);
                    let dm = sq_dist(&pm.point, &x);
                    let dlm = sq_dist(&pl.point, &pm.point);
                    if name == "key_lemma_bound1" {
                        let gap = ext(f.eval(&pl.point)?) - ext(f.eval(&pm.point)?);
                        let lower = (dm - dl + dlm) / (2.0 * mu);
                        let upper = (dm - dl - dlm) / (2.0 * lam);
                        Ok((gap - lower).min(upper - gap))
                    } else {
                        Ok((mu - lam) / (lam + mu) * (dm - dl) - dlm)
                    }
                })()
                .unwrap_or(fail);
                t.push(slack);
            }
            1e-10
        }
        "eta_monotone" | "prox_distance_monotone" => {
            for _ in 0..trials {
                let x = m.sample_base(rng);
                let a = rng.random_range(0.01..5.0);
                let b = rng.random_range(0.01..5.0);
                let (lam, mu) = if a <= b { (a, b) } else { (b, a) };
                let slack = (|| -> Result<f64> {
                    let sl = f.prox_summary(&x, lam)?;
                    let sm = f.prox_summary(&x, mu)?;
                    Ok(if name == "eta_monotone" {
                        sl.value - sm.value
                    } else {
                        sm.dist_sq.sqrt() - sl.dist_sq.sqrt()
                    })
                })()
                .unwrap_or(fail);
                t.push(slack);
            }
            1e-10
        }
        "envelope_limit" => {
            // e_λ f(x) increases to f(x) as λ ↓ 0 for x ∈ dom f
            for _ in 0..trials {
                let x = m.sample_interior(rng);
                let slack = (|| -> Result<f64> {
                    let fx = ext(f.eval(&x)?);
                    let lams = [1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-8];
                    let mut prev = f64::NEG_INFINITY;
                    let mut worst = f64::INFINITY;
                    let scale = 1.0 + fx.abs();
                    for &lam in &lams {
                        let e = moreau_envelope(f, &x, lam)?;
                        worst = worst.min(e - prev + 1e-12 * scale);
                        worst = worst.min(fx - e + 1e-12 * scale);
                        prev = e;
                    }
                    worst = worst.min(1e-2 * scale - (fx - prev));
                    Ok(worst)
                })()
                .unwrap_or(fail);
                t.push(slack);
            }
            0.0
        }
        "prox_nonexpansive" => {
            if m.origin_only() {
                return None;
            }
            for _ in 0..trials {
                let x = m.sample_base(rng);
                let y = m.sample_base(rng);
                let lam = rng.random_range(0.01..5.0);
                let slack = (|| -> Result<f64> {
                    let px = f.prox(&x, lam)?;
                    let py = f.prox(&y, lam)?;
                    Ok(sq_dist(&x, &y).sqrt() - sq_dist(&px.point, &py.point).sqrt())
                })()
                .unwrap_or(fail);
                t.push(slack);
            }
            1e-12
        }
        "epi_bsub_floor" | "level_bsub_nonneg" => {
            for _ in 0..trials {
                let x = m.sample_base(rng);
                let lam = rng.random_range(0.01..5.0);
                let alpha = rng.random_range(-2.0..2.0);
                let slack = if name == "epi_bsub_floor" {
                    ScalarObjective::epi(f, &x, alpha).sample(lam).map(|s| s.bsub - 1.0)
                } else {
                    ScalarObjective::level(f, &x, alpha).sample(lam).map(|s| s.bsub)
                };
                t.push(slack.unwrap_or(fail));
            }
            0.0
        }
        "theta_derivative_monotone" => {
            for _ in 0..trials {
                let x = m.sample_base(rng);
                let alpha = rng.random_range(-2.0..2.0);
                let obj = ScalarObjective::epi(f, &x, alpha);
                let slack = (|| -> Result<f64> {
                    let mut worst = f64::INFINITY;
                    let mut prev = obj.derivative(0.01)?;
                    for k in 1..=60 {
                        let lam = 0.01 + 0.1 * k as f64;
                        let d = obj.derivative(lam)?;
                        worst = worst.min(d - prev + 1e-12 * (1.0 + d.abs()));
                        prev = d;
                    }
                    Ok(worst)
                })()
                .unwrap_or(fail);
                t.push(slack);
            }
            0.0
        }
        "envelope_remainder" => {
            for _ in 0..trials {
                let x = m.sample_base(rng);
                let lam = rng.random_range(0.01..5.0);
                let slack = (|| -> Result<f64> {
                    let e = moreau_envelope(f, &x, lam)?;
                    let p = f.prox(&x, lam)?;
                    let eta = ext(f.eval(&p.point)?);
                    let rem = e - sq_dist(&x, &p.point) / (2.0 * lam);
                    Ok(1e-12 * (1.0 + eta.abs() + e.abs()) - (eta - rem).abs())
                })()
                .unwrap_or(fail);
                t.push(slack);
            }
            0.0
        }
        "prox_domain_limit" => {
            for _ in 0..trials {
                let x = m.sample_base(rng);
                let slack = (|| -> Result<f64> {
                    let dp = f.domain_projection(&x)?;
                    let mut prev = f64::INFINITY;
                    let mut worst = f64::INFINITY;
                    for lam in [1e-2, 1e-4, 1e-6, 1e-8] {
                        let err = sq_dist(&f.prox(&x, lam)?.point, &dp.point).sqrt();
                        worst = worst.min(prev - err + 1e-15);
                        prev = err;
                    }
                    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    Ok(worst.min(1e-3 * (1.0 + norm) - prev))
                })()
                .unwrap_or(fail);
                t.push(slack);
            }
            0.0
        }
        "sqrt_lambda_exactness" => {
            if !matches!(m.shape, Catalog::NegLog { .. }) {
                return None;
            }
            let zero = vec![0.0; m.dim];
            for _ in 0..trials {
                let lam: f64 = 10f64.powf(rng.random_range(-8.0..4.0));
                let slack = f
                    .prox(&zero, lam)
                    .map(|p| {
                        let s = lam.sqrt();
                        p.point
                            .iter()
                            .map(|&y| 1e-14 * s - (y - s).abs())
                            .fold(f64::INFINITY, f64::min)
                    })
                    .unwrap_or(fail);
                t.push(slack);
            }
            0.0
        }
        "grid_prox_agreement" => {
            if m.dim != 1 {
                return None;
            }
            for _ in 0..trials.min(20) {
                let x = m.sample_base(rng);
                let lam = rng.random_range(0.05..3.0);
                let slack = (|| -> Result<f64> {
                    let grid = GridSpec::for_prox(&m.shape, &x, lam)?.with_resolution(100_001)?;
                    let g = grid_prox(&m.shape, &x, lam, &grid)?;
                    let p = f.prox(&x, lam)?;
                    Ok(2.0 * grid.cell(0) - (g[0] - p.point[0]).abs())
                })()
                .unwrap_or(fail);
                t.push(slack);
            }
            0.0
        }
        _ => return None,
    };
    Some((t, tol))
}
