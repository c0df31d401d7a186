use thiserror::Error;

/// Errors produced by the channel models and their numerical machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the domain of the model or formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// A matrix or vector does not describe a valid qubit state.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// An argument violates the contract of the operation (e.g. an
    /// incomplete Kraus set or a mismatched phase generator).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A decay rate was requested where the contraction factor vanishes.
    #[error("rate undefined at t = {t}: contraction factor {factor:e} is below the floor")]
    Pole { t: f64, factor: f64 },

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature did not converge: estimate {estimate}, error estimate {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    /// A numerical scheme failed to reach the requested accuracy.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("index {index} out of range for a grid of {len} points")]
    Range { index: usize, len: usize },

    /// A computation would exceed its resource cap.
    #[error("resource limit: {0}")]
    Resource(String),

    #[error("unsupported query: {0}")]
    Unsupported(String),

    /// A precondition on numerical inputs (e.g. truncation) is not met.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Every point of a rate series is undefined.
    #[error("rate series cannot be classified: {0}")]
    Unclassifiable(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
