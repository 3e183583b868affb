//! Projections onto level sets `{f ≤ ᾱ}` and epigraphs `epi f`.
//!
//! Both follow the same two-branch recipe. If the projection of `x̄` onto
//! `cl(dom f)` already satisfies the constraint, that projection is the answer
//! (`λ* = 0`). Otherwise the answer is `P_{λ*} f(x̄)` where `λ* > 0` solves
//! `f(P_λ f(x̄)) = ᾱ` (level set) or `f(P_λ f(x̄)) = ᾱ + λ` (epigraph, with
//! ordinate `ᾱ + λ*`).

use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, ProxFunction};
use crate::envelope::{ObjectiveKind, ScalarObjective, StrictFeasibility};
use crate::error::{Error, Result};
use crate::solvers::{bisection, bracket, newton_fullstep, newton_linesearch, SolverConfig, SolverResult, StopRule};

pub const BISECTION_MAX_ITERS: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// The domain projection already satisfies the constraint; `λ* = 0`.
    DomainCase,
    RootCase,
}

/// Root-finding method for the `RootCase` branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    NewtonLineSearch,
    NewtonFullStep,
    /// Bracket from `λ₀`, then bisect.
    Bisection {
        rule: StopRule,
        tol: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    pub kind: ObjectiveKind,
    pub point: Vec<f64>,
    /// `ᾱ + λ*` for epigraphs (`ᾱ` on the domain branch); absent for level sets.
    pub ordinate: Option<f64>,
    pub lambda_star: f64,
    /// `|f(P_{λ*} f(x̄)) − ᾱ|` (level) or `|f(P_{λ*} f(x̄)) − λ* − ᾱ|` (epigraph);
    /// zero on the domain branch.
    pub residual: f64,
    pub branch: Branch,
    /// Present on the root branch.
    pub solver: Option<SolverResult>,
}

/// Projects `x` onto `{f ≤ alpha}` using the line-search Newton method.
pub fn project_level_set<F: ProxFunction + ?Sized>(
    f: &F,
    x: &[f64],
    alpha: f64,
    cfg: &SolverConfig,
) -> Result<ProjectionResult> {
    project(ObjectiveKind::Level, f, x, alpha, Method::NewtonLineSearch, cfg)
}

/// Projects `(x, alpha)` onto `epi f` using the line-search Newton method.
pub fn project_epigraph<F: ProxFunction + ?Sized>(
    f: &F,
    x: &[f64],
    alpha: f64,
    cfg: &SolverConfig,
) -> Result<ProjectionResult> {
    project(ObjectiveKind::Epi, f, x, alpha, Method::NewtonLineSearch, cfg)
}

pub fn project<F: ProxFunction + ?Sized>(
    kind: ObjectiveKind,
    f: &F,
    x: &[f64],
    alpha: f64,
    method: Method,
    cfg: &SolverConfig,
) -> Result<ProjectionResult> {
    if !alpha.is_finite() {
        return Err(Error::usage(format!("alpha must be finite, got {alpha}")));
    }
    let obj = ScalarObjective::new(kind, f, x, alpha);
    if obj.feasibility == StrictFeasibility::Violated {
        return Err(Error::Infeasible(format!(
            "level {alpha} does not exceed inf {} = {}",
            f.descriptor(),
            f.infimum().unwrap_or(f64::NAN)
        )));
    }

    let dp = f.domain_projection(x)?;
    if dp.value.le(alpha) {
        return Ok(ProjectionResult {
            kind,
            point: dp.point,
            ordinate: (kind == ObjectiveKind::Epi).then_some(alpha),
            lambda_star: 0.0,
            residual: 0.0,
            branch: Branch::DomainCase,
            solver: None,
        });
    }

    let result = match method {
        Method::NewtonLineSearch => newton_linesearch(&obj, cfg)?,
        Method::NewtonFullStep => newton_fullstep(&obj, cfg)?,
        Method::Bisection { rule, tol } => {
            let b = bracket(&obj, cfg.lambda0)?;
            bisection(&obj, b, rule, tol, BISECTION_MAX_ITERS)?
        }
    };
    if !result.status.is_success() {
        return Err(Error::SolverFailed(Box::new(result)));
    }
    let lambda = result.lambda_star;
    let p = f.prox(x, lambda)?;
    let eta = p
        .value
        .finite()
        .ok_or_else(|| Error::Numeric(format!("prox left dom f at λ = {lambda}")))?;
    let (ordinate, residual) = match kind {
        ObjectiveKind::Level => (None, (eta - alpha).abs()),
        ObjectiveKind::Epi => (Some(alpha + lambda), (eta - lambda - alpha).abs()),
    };
    Ok(ProjectionResult {
        kind,
        point: p.point,
        ordinate,
        lambda_star: lambda,
        residual,
        branch: Branch::RootCase,
        solver: Some(result),
    })
}

/// Soft-threshold level `τ` of the projection onto `{‖·‖₁ ≤ radius}`, by sorting.
/// Zero when `x` is already inside the ball.
pub fn l1_ball_sort_threshold(x: &[f64], radius: f64) -> Result<f64> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::usage(format!("radius must be positive, got {radius}")));
    }
    let norm: f64 = x.iter().map(|v| v.abs()).sum();
    if norm <= radius {
        return Ok(0.0);
    }
    let mut u: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    u.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cumsum += uk;
        let t = (cumsum - radius) / (k + 1) as f64;
        if uk > t {
            tau = t;
        } else {
            break;
        }
    }
    Ok(tau)
}

/// Exact projection onto `{‖·‖₁ ≤ radius}` by sort-and-threshold.
pub fn l1_ball_sort_project(x: &[f64], radius: f64) -> Result<Vec<f64>> {
    let tau = l1_ball_sort_threshold(x, radius)?;
    if tau == 0.0 {
        return Ok(x.to_vec());
    }
    Ok(x.iter()
        .map(|&v| {
            let m = (v.abs() - tau).max(0.0);
            if m > 0.0 {
                m.copysign(v)
            } else {
                0.0
            }
        })
        .collect())
}

/// Projection onto `{‖·‖₁ ≤ radius}` through the level-set route, using the
/// scaled member `(1/radius)‖·‖₁` at level 1.
pub fn project_l1_ball(x: &[f64], radius: f64, method: Method, cfg: &SolverConfig) -> Result<ProjectionResult> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::usage(format!("radius must be positive, got {radius}")));
    }
    let f = Catalog::L1 {
        scale: 1.0 / radius,
        dim: None,
    };
    project(ObjectiveKind::Level, &f, x, 1.0, method, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extended::ExtReal;
    use crate::solvers::SolverStatus;

    const L1_X: [f64; 4] = [-2.0, 0.8, 3.0, 1.3];

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn l1_level_example() {
        let r = project_level_set(&Catalog::l1(), &L1_X, 1.0, &cfg()).unwrap();
        assert_eq!(r.branch, Branch::RootCase);
        assert!((r.lambda_star - 2.0).abs() < 1e-10);
        let expected = [0.0, 0.0, 1.0, 0.0];
        for (a, b) in r.point.iter().zip(expected) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn inside_ball_is_domain_case() {
        let r = project_level_set(&Catalog::l1(), &[0.3, -0.3], 1.0, &cfg()).unwrap();
        assert_eq!(r.branch, Branch::DomainCase);
        assert_eq!(r.point, vec![0.3, -0.3]);
        assert_eq!(r.lambda_star, 0.0);
    }

    #[test]
    fn neglog_level_example() {
        let r = project_level_set(&Catalog::neg_log(), &[0.5], 0.0, &cfg()).unwrap();
        assert!((r.point[0] - 1.0).abs() < 1e-12);
        assert!((r.lambda_star - 0.5).abs() < 1e-12);
    }

    #[test]
    fn infeasible_level_errors() {
        assert!(matches!(
            project_level_set(&Catalog::l1(), &L1_X, 0.0, &cfg()),
            Err(Error::Infeasible(_))
        ));
        assert!(matches!(
            project_level_set(&Catalog::Box { dim: None }, &[3.0], -0.1, &cfg()),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn cycle_instance_epigraph() {
        let f = Catalog::abs_box(2.0);
        let r = project_epigraph(&f, &[4.0], -1.0, &cfg()).unwrap();
        assert!((r.lambda_star - 1.8).abs() < 1e-10);
        assert!((r.point[0] - 0.4).abs() < 1e-10);
        assert!((r.ordinate.unwrap() - 0.8).abs() < 1e-10);
        // normal-cone certificate: (x̄ − p, ᾱ − t) = λ*(g, −1) with g = 2 ∈ ∂f(0.4)
        let (dx, dt) = (4.0 - r.point[0], -1.0 - r.ordinate.unwrap());
        assert!((dx / -dt - 2.0).abs() < 1e-9);
    }

    #[test]
    fn fullstep_failure_propagates() {
        let f = Catalog::abs_box(2.0);
        match project(ObjectiveKind::Epi, &f, &[4.0], -1.0, Method::NewtonFullStep, &cfg()) {
            Err(Error::SolverFailed(r)) => assert_eq!(r.status, SolverStatus::Cycled),
            other => panic!("expected cycling failure, got {other:?}"),
        }
    }

    #[test]
    fn point_in_epigraph_is_domain_case() {
        let r = project_epigraph(&Catalog::Box { dim: None }, &[0.0], 5.0, &cfg()).unwrap();
        assert_eq!(r.branch, Branch::DomainCase);
        assert_eq!(r.point, vec![0.0]);
        assert_eq!(r.ordinate, Some(5.0));
    }

    #[test]
    fn neglog_epigraph_consistency() {
        let f = Catalog::neg_log();
        let r = project_epigraph(&f, &[1.0], -1.0, &cfg()).unwrap();
        let t = r.ordinate.unwrap();
        assert!((f.eval(&r.point).unwrap().to_f64() - t).abs() < 1e-8);
        let lam = r.lambda_star;
        assert!((r.point[0] - (1.0 + (1.0 + 4.0 * lam).sqrt()) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn neglog_outside_closed_domain_goes_to_root_branch() {
        let f = Catalog::neg_log();
        assert_eq!(f.domain_projection(&[-1.0]).unwrap().value, ExtReal::PosInf);
        let r = project_epigraph(&f, &[-1.0], -1.0, &cfg()).unwrap();
        assert_eq!(r.branch, Branch::RootCase);
        assert!(r.lambda_star > 0.0 && r.point[0] > 0.0);
    }

    #[test]
    fn sort_baseline_examples() {
        assert_eq!(l1_ball_sort_project(&L1_X, 1.0).unwrap(), vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(l1_ball_sort_project(&[0.5, 0.4], 1.0).unwrap(), vec![0.5, 0.4]);
        assert_eq!(l1_ball_sort_project(&[1.0, 1.0], 1.0).unwrap(), vec![0.5, 0.5]);
        assert!((l1_ball_sort_threshold(&L1_X, 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(l1_ball_sort_project(&[1.0], 0.0).is_err());
    }

    #[test]
    fn scaled_radius_matches_sort() {
        let x = [0.9, -2.2, 0.1, 1.7, -0.4];
        for radius in [0.5, 1.0, 2.5] {
            let r = project_l1_ball(&x, radius, Method::NewtonFullStep, &cfg().with_eps0(0.0)).unwrap();
            let s = l1_ball_sort_project(&x, radius).unwrap();
            for (a, b) in r.point.iter().zip(&s) {
                assert!((a - b).abs() < 1e-12, "radius {radius}");
            }
        }
    }
}
