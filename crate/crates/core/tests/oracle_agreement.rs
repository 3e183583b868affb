//! Projections and solvers checked against the brute-force oracles.

use epiproj::oracle::{brute_epi_project, brute_level_project, grid_prox, GridSpec};
use epiproj::{
    bisection, bracket, newton_fullstep, newton_linesearch, project_epigraph, project_level_set, Catalog, ProxFunction,
    ScalarObjective, SolverConfig, StopRule,
};

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

#[test]
fn grid_prox_matches_closed_forms() {
    let cases: Vec<(Catalog, Vec<f64>, f64)> = vec![
        (Catalog::l1(), vec![1.7], 0.4),
        (Catalog::l1(), vec![1.7, -0.2], 0.4),
        (Catalog::abs_box(2.0), vec![4.0], 1.2),
        (Catalog::abs_box(2.0), vec![-0.3, 2.5], 0.1),
        (Catalog::neg_log(), vec![-1.0], 0.5),
        (Catalog::neg_log(), vec![0.3, -0.7], 2.0),
        (Catalog::NegSqrt, vec![0.0], 2.0),
        (Catalog::half_square(), vec![2.0, -1.0], 3.0),
    ];
    for (f, x, lam) in cases {
        let grid = GridSpec::for_prox(&f, &x, lam).unwrap();
        let g = grid_prox(&f, &x, lam, &grid).unwrap();
        let p = f.prox(&x, lam).unwrap().point;
        let tol = if x.len() == 1 { grid.cell(0) } else { 1e-7 };
        assert!(max_diff(&g, &p) <= tol, "{f} x={x:?} λ={lam}: grid {g:?} vs {p:?}");
    }
}

#[test]
fn epigraph_projection_matches_brute_force_2d() {
    let cases: Vec<(Catalog, [f64; 2], f64)> = vec![
        (Catalog::l1(), [1.5, -0.4], -0.5),
        (Catalog::abs_box(2.0), [3.0, 1.0], 0.5),
        (Catalog::neg_log(), [-0.5, 0.2], -1.0),
        (Catalog::half_square(), [1.0, 2.0], 0.3),
    ];
    for (f, x, alpha) in cases {
        let r = project_epigraph(&f, &x, alpha, &SolverConfig::default()).unwrap();
        let grid = GridSpec::for_epigraph(&f, &x, alpha).unwrap();
        let (u, t) = brute_epi_project(&f, &x, alpha, &grid).unwrap();
        assert!(max_diff(&r.point, &u) < 1e-6, "{f}: {:?} vs {u:?}", r.point);
        assert!((r.ordinate.unwrap() - t).abs() < 1e-6);
    }
}

#[test]
fn level_projection_matches_brute_force_2d() {
    let cases: Vec<(Catalog, [f64; 2], f64)> = vec![
        (Catalog::l1(), [1.5, -0.4], 0.5),
        (Catalog::abs_box(2.0), [3.0, 1.0], 1.0),
        (Catalog::neg_log(), [-0.5, 0.2], 0.5),
        (Catalog::half_square(), [1.0, 2.0], 0.3),
    ];
    for (f, x, alpha) in cases {
        let r = project_level_set(&f, &x, alpha, &SolverConfig::default()).unwrap();
        let grid = GridSpec::for_level(&f, &x, alpha).unwrap();
        let u = brute_level_project(&f, &x, alpha, &grid).unwrap();
        assert!(max_diff(&r.point, &u) < 1e-6, "{f}: {:?} vs {u:?}", r.point);
    }
}

/// Newton (both variants, when full-step does not cycle) and bisection land
/// on the same root.
#[test]
fn solvers_agree_on_small_instances() {
    let cases: Vec<(Catalog, Vec<f64>, f64, bool)> = vec![
        (Catalog::l1(), vec![-2.0, 0.8, 3.0, 1.3], 1.0, true),
        (Catalog::l1(), vec![-2.0, 0.8, 3.0, 1.3], -0.5, false),
        (Catalog::neg_log(), vec![1.0], -1.0, false),
        (Catalog::neg_log(), vec![0.4, -1.0, 2.0], 0.5, true),
        (Catalog::neg_log(), vec![0.4, -1.0, 2.0, 0.1], -3.0, false),
        (Catalog::half_square(), vec![3.0, -1.0], 0.5, true),
        (Catalog::abs_box(1.0), vec![2.0, 0.5, -1.5], 0.2, false),
        (Catalog::NegSqrt, vec![0.0], -1.0, false),
    ];
    for (f, x, alpha, level) in cases {
        let obj = if level {
            ScalarObjective::level(&f, &x, alpha)
        } else {
            ScalarObjective::epi(&f, &x, alpha)
        };
        let cfg = SolverConfig::default();
        let ls = newton_linesearch(&obj, &cfg).unwrap();
        assert!(ls.status.is_success(), "{f} {ls:?}");
        let b = bracket(&obj, 1.0).unwrap();
        let bi = bisection(&obj, b, StopRule::WidthTol, 1e-12, 400).unwrap();
        assert!(
            (ls.lambda_star - bi.lambda_star).abs() < 1e-8,
            "{f}: {} vs {}",
            ls.lambda_star,
            bi.lambda_star
        );
        let full = newton_fullstep(&obj, &cfg).unwrap();
        if full.status.is_success() {
            assert!((full.lambda_star - ls.lambda_star).abs() < 1e-8);
        }
    }
}

#[test]
fn level_projection_of_negsqrt_origin() {
    // {−√u ≤ ᾱ} = [ᾱ², ∞)
    let f = Catalog::NegSqrt;
    let r = project_level_set(&f, &[0.0], -0.7, &SolverConfig::default()).unwrap();
    assert!((r.point[0] - 0.49).abs() < 1e-10);
    let grid = GridSpec::for_level(&f, &[0.0], -0.7).unwrap();
    let u = brute_level_project(&f, &[0.0], -0.7, &grid).unwrap();
    assert!((u[0] - 0.49).abs() <= grid.cell(0));
}
