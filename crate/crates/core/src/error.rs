use thiserror::Error;

use crate::solvers::SolverResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad arguments: non-positive λ, dimension mismatch, malformed descriptor.
    #[error("usage error: {0}")]
    Usage(String),

    /// The request is valid in principle but not covered by this implementation.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The level value does not exceed the infimum of the function.
    #[error("infeasible level: {0}")]
    Infeasible(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("could not bracket a root of the scalar derivative: {0}")]
    BracketFailed(String),

    #[error("solver stopped without converging ({:?} after {} iterations, residual {:e})", .0.status, .0.iterations, .0.residual)]
    SolverFailed(Box<SolverResult>),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}
