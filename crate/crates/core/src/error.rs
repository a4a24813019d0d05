use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Shapes or arguments violate an operation's contract.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    /// A parameter lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole: 1 + a_j * theta vanishes for a_j = {eigenvalue}")]
    Pole { eigenvalue: f64 },

    #[error("eigenvalue iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("shape parameter p = {p} is not in the Gindikin set for d = {d}")]
    Admissibility { d: usize, p: f64 },

    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("ill-conditioned: {0}")]
    Conditioning(String),

    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
