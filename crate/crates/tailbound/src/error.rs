use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative routine stopped before reaching its target residual.
    #[error("{what} failed to converge (residual {residual:.3e})")]
    Convergence { what: &'static str, residual: f64 },

    /// A numeric computation could not reach the requested accuracy
    /// (overflow, lost precision, or an exhausted evaluation budget).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The system configuration violates a structural constraint.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
