//! Minimization of the scalar objective `θ_ξ` over `λ > 0`.
//!
//! Two semismooth (SC¹) Newton variants drive `θ'_ξ` to zero using a Bouligand
//! element `g_k` of `∂_B θ'_ξ(λ_k)`:
//!
//! * [`newton_linesearch`]: `Δ_k = max(−θ'(λ_k)/(g_k+ε_k), −(1−μ)λ_k)` followed
//!   by Armijo backtracking on `θ_ξ`;
//! * [`newton_fullstep`]: `Δ_k = max(−λ_k/2, −θ'(λ_k)/(g_k+ε_k))`, no line
//!   search. It converges when `θ'_ξ` is concave left of the solution set and
//!   may cycle otherwise; cycles are detected and reported.
//!
//! [`bisection`] and [`bracket`] provide the derivative-free baseline.

use serde::{Deserialize, Serialize};

use crate::catalog::ProxFunction;
use crate::envelope::{ObjectiveKind, ScalarObjective};
use crate::error::{Error, Result};
use crate::extended::ExtReal;

/// The line-search clamp keeps `λ_{k+1} ≥ μ·λ_k`.
pub const POSITIVITY_MARGIN: f64 = 1e-3;
/// Backtracking gives up after this many reductions and takes the last trial step.
pub const MAX_BACKTRACKS: u32 = 60;
/// Relative tolerance for deciding that an iterate revisits an earlier one.
pub const CYCLE_MATCH_TOL: f64 = 1e-9;
/// Cap on the number of doublings/halvings performed by [`bracket`].
pub const MAX_BRACKET_STEPS: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Initial iterate `λ₀ > 0`.
    pub lambda0: f64,
    /// Stop once `|θ'(λ_k)| ≤ delta`.
    pub delta: f64,
    /// `ε₀` of the regularization schedule `ε_k = ε₀ ρᵏ`. `None` selects the
    /// per-kind default: `1e-3` for level sets, `0` for epigraphs.
    pub eps0: Option<f64>,
    pub rho: f64,
    /// Backtracking factor.
    pub beta: f64,
    /// Armijo constant.
    pub sigma: f64,
    pub max_iters: usize,
    /// How many past iterates the full-step method compares against.
    pub cycle_window: usize,
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda0: 1.0,
            delta: 1e-12,
            eps0: None,
            rho: 0.5,
            beta: 0.5,
            sigma: 1e-4,
            max_iters: 100,
            cycle_window: 8,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !(self.lambda0 > 0.0 && self.lambda0.is_finite()) {
            return Err(Error::usage(format!("lambda0 must be positive, got {}", self.lambda0)));
        }
        if !(self.delta > 0.0) {
            return Err(Error::usage(format!("delta must be positive, got {}", self.delta)));
        }
        if !open_unit(self.beta) || !open_unit(self.sigma) {
            return Err(Error::usage("beta and sigma must lie in (0, 1)"));
        }
        if !open_unit(self.rho) {
            return Err(Error::usage("rho must lie in (0, 1)"));
        }
        if let Some(e) = self.eps0 {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(Error::usage(format!("eps0 must be nonnegative, got {e}")));
            }
        }
        if self.max_iters == 0 || self.cycle_window == 0 {
            return Err(Error::usage("max_iters and cycle_window must be positive"));
        }
        Ok(())
    }

    pub fn eps0_for(&self, kind: ObjectiveKind) -> f64 {
        self.eps0.unwrap_or(match kind {
            ObjectiveKind::Level => 1e-3,
            ObjectiveKind::Epi => 0.0,
        })
    }

    pub fn with_lambda0(mut self, lambda0: f64) -> Self {
        self.lambda0 = lambda0;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_eps0(mut self, eps0: f64) -> Self {
        self.eps0 = Some(eps0);
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    Converged,
    MaxIter,
    /// The full-step iteration revisited an earlier iterate without reducing `|θ'|`.
    Cycled,
    BracketFailed,
    /// The update no longer changes the iterate in floating point; the residual
    /// is at the rounding floor of `θ'` even if it exceeds `delta`.
    Stagnated,
}

impl SolverStatus {
    /// Whether the returned `λ` can be used as the root.
    pub fn is_success(self) -> bool {
        matches!(self, SolverStatus::Converged | SolverStatus::Stagnated)
    }
}

/// One Newton or bisection iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub lambda: f64,
    pub derivative: f64,
    /// `g_k` (Newton) or 0 (bisection).
    pub bsub: f64,
    pub eps: f64,
    /// `Δ_k` before backtracking.
    pub step: f64,
    /// Accepted step length `β^l` (1 for full steps).
    pub step_length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    pub lambda_star: f64,
    pub status: SolverStatus,
    pub iterations: usize,
    /// `|θ'(λ*)|`.
    pub residual: f64,
    /// Number of `θ'` evaluations, bracketing included.
    pub evaluations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceStep>>,
    /// The repeating iterates when `status == Cycled`.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub orbit: Vec<f64>,
    /// Set when some line search hit [`MAX_BACKTRACKS`].
    #[serde(default)]
    pub backtrack_capped: bool,
}

impl SolverResult {
    fn new(lambda: f64, status: SolverStatus, iterations: usize, residual: f64) -> Self {
        SolverResult {
            lambda_star: lambda,
            status,
            iterations,
            residual,
            evaluations: 0,
            trace: None,
            orbit: Vec::new(),
            backtrack_capped: false,
        }
    }
}

fn newton_direction(derivative: f64, bsub: f64, eps: f64) -> Result<f64> {
    if !bsub.is_finite() || !derivative.is_finite() {
        return Err(Error::Numeric(format!(
            "non-finite Newton data: θ' = {derivative}, g = {bsub}"
        )));
    }
    let denom = bsub + eps;
    if denom > 0.0 {
        Ok(-derivative / denom)
    } else if derivative > 0.0 {
        Ok(f64::NEG_INFINITY)
    } else {
        Err(Error::Numeric(format!(
            "zero curvature with θ' = {derivative} < 0; use a positive eps0"
        )))
    }
}

fn stagnated(prev: f64, next: f64) -> bool {
    (next - prev).abs() <= 4.0 * f64::EPSILON * prev.abs()
}

/// Line-search SC¹ Newton method.
pub fn newton_linesearch<F: ProxFunction + ?Sized>(
    obj: &ScalarObjective<'_, F>,
    cfg: &SolverConfig,
) -> Result<SolverResult> {
    cfg.validate()?;
    let eps0 = cfg.eps0_for(obj.kind);
    let mut trace = cfg.record_trace.then(Vec::new);
    let mut lam = cfg.lambda0;
    let mut capped = false;

    for k in 0.. {
        let (d, g) = obj.derivative_and_bsub(lam)?;
        let evaluations = k + 1;
        let finish = |status, trace, capped| SolverResult {
            trace,
            backtrack_capped: capped,
            evaluations,
            ..SolverResult::new(lam, status, k, d.abs())
        };
        if d.abs() <= cfg.delta {
            return Ok(finish(SolverStatus::Converged, trace, capped));
        }
        if k >= cfg.max_iters {
            return Ok(finish(SolverStatus::MaxIter, trace, capped));
        }
        let eps = eps0 * cfg.rho.powi(k as i32);
        let step = newton_direction(d, g, eps)?.max(-(1.0 - POSITIVITY_MARGIN) * lam);
        if !step.is_finite() {
            return Err(Error::Numeric(format!("unbounded Newton step at λ = {lam}")));
        }

        let (theta_k, scale_k) = obj.value_with_scale(lam)?;
        let theta_k = theta_k
            .finite()
            .ok_or_else(|| Error::Numeric(format!("θ(λ) = +∞ at iterate λ = {lam}")))?;
        // The Armijo right-hand side uses θ'(λ_k).
        let decrease = cfg.sigma * d * step;
        let mut t = 1.0;
        let mut next = lam + step;
        let mut accepted = false;
        for _ in 0..=MAX_BACKTRACKS {
            next = lam + t * step;
            let (theta_c, scale_c) = obj.value_with_scale(next)?;
            if let ExtReal::Finite(tc) = theta_c {
                let slack = 8.0 * f64::EPSILON * (scale_k + scale_c);
                if tc <= theta_k + t * decrease + slack {
                    accepted = true;
                    break;
                }
            }
            t *= cfg.beta;
        }
        if !accepted {
            // Escape hatch for rounding noise: take the smallest trial step.
            capped = true;
            t /= cfg.beta;
            next = lam + t * step;
        }
        if let Some(tr) = trace.as_mut() {
            tr.push(TraceStep {
                lambda: lam,
                derivative: d,
                bsub: g,
                eps,
                step,
                step_length: t,
            });
        }
        if stagnated(lam, next) {
            return Ok(finish(SolverStatus::Stagnated, trace, capped));
        }
        lam = next;
    }
    unreachable!()
}

/// Full-step SC¹ Newton method with cycle detection.
pub fn newton_fullstep<F: ProxFunction + ?Sized>(
    obj: &ScalarObjective<'_, F>,
    cfg: &SolverConfig,
) -> Result<SolverResult> {
    cfg.validate()?;
    let eps0 = cfg.eps0_for(obj.kind);
    let mut trace = cfg.record_trace.then(Vec::new);
    // (λ_j, |θ'(λ_j)|) for the last `cycle_window` iterates
    let mut history: Vec<(f64, f64)> = Vec::with_capacity(cfg.cycle_window + 1);
    let mut lam = cfg.lambda0;

    for k in 0.. {
        let (d, g) = obj.derivative_and_bsub(lam)?;
        let finish = |status, trace| SolverResult {
            trace,
            evaluations: k + 1,
            ..SolverResult::new(lam, status, k, d.abs())
        };
        if d.abs() <= cfg.delta {
            return Ok(finish(SolverStatus::Converged, trace));
        }
        if let Some(orbit) = find_cycle(&history, lam, d.abs()) {
            let mut r = finish(SolverStatus::Cycled, trace);
            r.orbit = orbit;
            return Ok(r);
        }
        if k >= cfg.max_iters {
            return Ok(finish(SolverStatus::MaxIter, trace));
        }
        let eps = eps0 * cfg.rho.powi(k as i32);
        let step = newton_direction(d, g, eps)?.max(-0.5 * lam);
        if !step.is_finite() {
            return Err(Error::Numeric(format!("unbounded Newton step at λ = {lam}")));
        }
        if let Some(tr) = trace.as_mut() {
            tr.push(TraceStep {
                lambda: lam,
                derivative: d,
                bsub: g,
                eps,
                step,
                step_length: 1.0,
            });
        }
        let next = lam + step;
        if stagnated(lam, next) {
            return Ok(finish(SolverStatus::Stagnated, trace));
        }
        if history.len() == cfg.cycle_window {
            history.remove(0);
        }
        history.push((lam, d.abs()));
        lam = next;
    }
    unreachable!()
}

/// Looks for an earlier iterate equal to `lam` (to [`CYCLE_MATCH_TOL`]) whose
/// residual was no larger, with at least two distinct values in between.
fn find_cycle(history: &[(f64, f64)], lam: f64, residual: f64) -> Option<Vec<f64>> {
    let same = |a: f64, b: f64| (a - b).abs() <= CYCLE_MATCH_TOL * a.abs().max(1.0);
    for j in (0..history.len()).rev() {
        let (lj, rj) = history[j];
        if !same(lj, lam) || residual < rj {
            continue;
        }
        let orbit: Vec<f64> = history[j..].iter().map(|h| h.0).collect();
        if orbit.iter().any(|&v| !same(v, lj)) {
            return Some(orbit);
        }
    }
    None
}

/// A closed interval `[lo, hi]` with `θ'(lo) < 0 ≤ θ'(hi)` (or `lo == hi` at a root).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    /// `θ'` evaluations spent finding it.
    pub evaluations: usize,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Self {
        Bracket { lo, hi, evaluations: 0 }
    }

    pub fn contains(&self, lambda: f64) -> bool {
        self.lo <= lambda && lambda <= self.hi
    }
}

/// Geometric search (factor 2) from `λ₀` for a sign change of `θ'`.
pub fn bracket<F: ProxFunction + ?Sized>(obj: &ScalarObjective<'_, F>, lambda0: f64) -> Result<Bracket> {
    if !(lambda0 > 0.0 && lambda0.is_finite()) {
        return Err(Error::usage(format!("lambda0 must be positive, got {lambda0}")));
    }
    let d0 = obj.derivative(lambda0)?;
    let mut evaluations = 1;
    if d0 == 0.0 {
        return Ok(Bracket {
            lo: lambda0,
            hi: lambda0,
            evaluations,
        });
    }
    if d0 > 0.0 {
        let mut hi = lambda0;
        for _ in 0..MAX_BRACKET_STEPS {
            let lo = 0.5 * hi;
            let d = obj.derivative(lo)?;
            evaluations += 1;
            if d < 0.0 {
                return Ok(Bracket { lo, hi, evaluations });
            }
            if d == 0.0 {
                return Ok(Bracket {
                    lo,
                    hi: lo,
                    evaluations,
                });
            }
            hi = lo;
        }
    } else {
        let mut lo = lambda0;
        for _ in 0..MAX_BRACKET_STEPS {
            let hi = 2.0 * lo;
            if !hi.is_finite() {
                break;
            }
            let d = obj.derivative(hi)?;
            evaluations += 1;
            if d >= 0.0 {
                return Ok(Bracket { lo, hi, evaluations });
            }
            lo = hi;
        }
    }
    Err(Error::BracketFailed(format!(
        "no sign change of θ' within {MAX_BRACKET_STEPS} doublings from λ₀ = {lambda0}"
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Stop when `|θ'(mid)| < tol`.
    DerivTol,
    /// Stop when the bracket is narrower than `tol`; the upper end is returned,
    /// since `θ'(hi) > 0` puts `P_hi f(x̄)` inside the constraint set.
    WidthTol,
}

/// Bisection on `θ'` over a bracket with `θ'(lo) < 0 < θ'(hi)`.
///
/// With [`StopRule::WidthTol`], `Converged` certifies the bracket width, not
/// `residual ≤ tol`.
pub fn bisection<F: ProxFunction + ?Sized>(
    obj: &ScalarObjective<'_, F>,
    bracket: Bracket,
    rule: StopRule,
    tol: f64,
    max_iters: usize,
) -> Result<SolverResult> {
    if !(tol > 0.0) {
        return Err(Error::usage(format!("tolerance must be positive, got {tol}")));
    }
    let Bracket { mut lo, mut hi, .. } = bracket;
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(Error::usage(format!("invalid bracket [{lo}, {hi}]")));
    }
    let mut evaluations = bracket.evaluations;
    let done = |lam: f64, status, iters, d: f64, evals| {
        let mut r = SolverResult::new(lam, status, iters, d.abs());
        r.evaluations = evals;
        r
    };

    let d_lo = obj.derivative(lo)?;
    evaluations += 1;
    if d_lo == 0.0 {
        return Ok(done(lo, SolverStatus::Converged, 0, 0.0, evaluations));
    }
    let d_hi = if hi == lo {
        d_lo
    } else {
        evaluations += 1;
        obj.derivative(hi)?
    };
    if d_hi == 0.0 {
        return Ok(done(hi, SolverStatus::Converged, 0, 0.0, evaluations));
    }
    if !(d_lo < 0.0 && d_hi > 0.0) {
        return Ok(done(lo, SolverStatus::BracketFailed, 0, d_lo, evaluations));
    }

    for k in 0..max_iters {
        if rule == StopRule::WidthTol && hi - lo < tol {
            let d = obj.derivative(hi)?;
            return Ok(done(hi, SolverStatus::Converged, k, d, evaluations + 1));
        }
        let mid = 0.5 * (lo + hi);
        let d = obj.derivative(mid)?;
        evaluations += 1;
        if d == 0.0 || (rule == StopRule::DerivTol && d.abs() < tol) {
            return Ok(done(mid, SolverStatus::Converged, k + 1, d, evaluations));
        }
        if mid <= lo || mid >= hi {
            return Ok(done(mid, SolverStatus::Stagnated, k + 1, d, evaluations));
        }
        if d < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    let d = obj.derivative(mid)?;
    Ok(done(mid, SolverStatus::MaxIter, max_iters, d, evaluations + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Catalog;

    const L1_X: [f64; 4] = [-2.0, 0.8, 3.0, 1.3];

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        for bad in [
            SolverConfig {
                beta: 1.0,
                ..Default::default()
            },
            SolverConfig {
                sigma: 0.0,
                ..Default::default()
            },
            SolverConfig {
                delta: 0.0,
                ..Default::default()
            },
            SolverConfig {
                lambda0: -1.0,
                ..Default::default()
            },
            SolverConfig {
                eps0: Some(-1.0),
                ..Default::default()
            },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Usage(_))));
        }
    }

    #[test]
    fn eps_defaults_by_kind() {
        let c = SolverConfig::default();
        assert_eq!(c.eps0_for(ObjectiveKind::Level), 1e-3);
        assert_eq!(c.eps0_for(ObjectiveKind::Epi), 0.0);
    }

    #[test]
    fn fullstep_cycles_on_two_abs_box() {
        let f = Catalog::abs_box(2.0);
        let x = [4.0];
        let obj = ScalarObjective::epi(&f, &x, -1.0);
        let r = newton_fullstep(&obj, &SolverConfig::default().with_trace()).unwrap();
        assert_eq!(r.status, SolverStatus::Cycled);
        let mut orbit = r.orbit.clone();
        orbit.sort_by(f64::total_cmp);
        assert_eq!(orbit.len(), 2);
        assert!((orbit[0] - 1.5).abs() < 1e-9 && (orbit[1] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn linesearch_converges_on_two_abs_box() {
        let f = Catalog::abs_box(2.0);
        let x = [4.0];
        let obj = ScalarObjective::epi(&f, &x, -1.0);
        let r = newton_linesearch(&obj, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolverStatus::Converged);
        assert!((r.lambda_star - 1.8).abs() < 1e-10);
    }

    #[test]
    fn l1_level_newton_finds_two() {
        let f = Catalog::l1();
        let obj = ScalarObjective::level(&f, &L1_X, 1.0);
        for lam0 in [0.1, 1.0, 3.0, 10.0] {
            let cfg = SolverConfig::default().with_lambda0(lam0);
            let a = newton_linesearch(&obj, &cfg).unwrap();
            assert!(a.status.is_success(), "{a:?}");
            assert!((a.lambda_star - 2.0).abs() < 1e-10);
            let b = newton_fullstep(&obj, &cfg).unwrap();
            assert!(b.status.is_success(), "{b:?}");
            assert!((b.lambda_star - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn iterates_stay_positive() {
        let f = Catalog::neg_log();
        let x = [-0.9, 0.2];
        let obj = ScalarObjective::epi(&f, &x, -0.5);
        for lam0 in [1e-6, 1e-2, 50.0] {
            let cfg = SolverConfig::default().with_lambda0(lam0).with_trace();
            for r in [
                newton_linesearch(&obj, &cfg).unwrap(),
                newton_fullstep(&obj, &cfg).unwrap(),
            ] {
                assert!(r.status.is_success());
                assert!(r.trace.unwrap().iter().all(|s| s.lambda > 0.0));
                assert!(r.lambda_star > 0.0);
            }
        }
    }

    #[test]
    fn bracket_examples() {
        let f = Catalog::neg_log();
        let x = [1.0];
        let obj = ScalarObjective::epi(&f, &x, -1.0);
        let b = bracket(&obj, 1.0).unwrap();
        assert_eq!((b.lo, b.hi), (0.5, 1.0));

        let g = Catalog::l1();
        let lev = ScalarObjective::level(&g, &L1_X, 1.0);
        let b = bracket(&lev, 3.0).unwrap();
        assert!(b.contains(2.0));
        assert!(lev.derivative(b.lo).unwrap() < 0.0);
        assert_eq!(
            bracket(&lev, 2.0).unwrap(),
            Bracket {
                lo: 2.0,
                hi: 2.0,
                evaluations: 1
            }
        );
    }

    #[test]
    fn bracket_fails_without_root() {
        // infeasible level: θ' = ᾱ − η ≥ 0 everywhere is impossible to bracket from above
        let g = Catalog::l1();
        let lev = ScalarObjective::level(&g, &L1_X, -1.0);
        assert!(matches!(bracket(&lev, 1.0), Err(Error::BracketFailed(_))));
    }

    #[test]
    fn bisection_examples() {
        let g = Catalog::l1();
        let lev = ScalarObjective::level(&g, &L1_X, 1.0);
        let r = bisection(&lev, Bracket::new(1e-12, 3.0), StopRule::WidthTol, 1e-10, 200).unwrap();
        assert_eq!(r.status, SolverStatus::Converged);
        assert!((r.lambda_star - 2.0).abs() < 1e-10);

        let r = bisection(&lev, Bracket::new(2.0, 2.0), StopRule::DerivTol, 1e-12, 200).unwrap();
        assert_eq!(r.lambda_star, 2.0);
        assert_eq!(r.iterations, 0);

        let r = bisection(&lev, Bracket::new(2.5, 3.0), StopRule::DerivTol, 1e-12, 200).unwrap();
        assert_eq!(r.status, SolverStatus::BracketFailed);
    }
}
