//! Euclidean projections onto epigraphs and level sets of closed proper convex
//! functions.
//!
//! Projecting `x̄` onto `{f ≤ ᾱ}` or `(x̄, ᾱ)` onto `epi f` reduces to a single
//! proximal evaluation `P_λ f(x̄)` once the right parameter `λ* ≥ 0` is known.
//! That parameter is the root of a monotone, semismooth scalar function, found
//! here by a semismooth Newton method (or bisection, as a baseline).
//!
//! ```
//! use epiproj::{project_epigraph, Catalog, SolverConfig};
//!
//! let f = Catalog::abs_box(2.0); // 2|·| + δ_[−1,1]
//! let r = project_epigraph(&f, &[4.0], -1.0, &SolverConfig::default()).unwrap();
//! assert!((r.lambda_star - 1.8).abs() < 1e-10);
//! assert!((r.point[0] - 0.4).abs() < 1e-10);
//! assert!((r.ordinate.unwrap() - 0.8).abs() < 1e-10);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod catalog;
pub mod envelope;
pub mod error;
pub mod extended;
pub mod io;
pub mod oracle;
pub mod projections;
pub mod solvers;

pub use catalog::{Catalog, ProxEvaluation, ProxFunction, ProxSummary};
pub use envelope::{
    envelope_gradient, moreau_envelope, phi_bar, proximal_value, theta, ObjectiveKind, ScalarObjective,
    StrictFeasibility, ThetaSample,
};
pub use error::{Error, Result};
pub use extended::ExtReal;
pub use projections::{
    l1_ball_sort_project, project, project_epigraph, project_level_set, Branch, Method, ProjectionResult,
};
pub use solvers::{
    bisection, bracket, newton_fullstep, newton_linesearch, Bracket, SolverConfig, SolverResult, SolverStatus,
    StopRule, TraceStep,
};
