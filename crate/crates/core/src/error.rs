use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested set is empty by definition (for instance the
    /// c-subdifferential at a point where the function is `+inf`).
    #[error("empty result: {0}")]
    EmptyResult(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("solver error: {0}")]
    SolverError(String),

    #[error("certificate mismatch at ({x}, {z}): residual {residual:e}")]
    CertificateMismatch { x: usize, z: usize, residual: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
