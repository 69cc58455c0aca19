use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration overflowed at node {node}")]
    Overflow { node: usize },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    Convergence {
        what: String,
        iterations: usize,
        residual: f64,
    },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("insufficient spectrum: {0}")]
    InsufficientSpectrum(String),

    #[error("spectrum coverage: {0}")]
    Coverage(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("branch not found: {0}")]
    BranchNotFound(String),

    #[error("invalid kernel direction: {0}")]
    InvalidKernel(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn convergence(what: impl Into<String>, iterations: usize, residual: f64) -> Self {
        Error::Convergence {
            what: what.into(),
            iterations,
            residual,
        }
    }
}
