use thiserror::Error;

/// Errors raised by the estimators, samplers and transport dynamics.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A distribution or experiment was configured with unusable parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// A numerical routine produced a non-finite value or failed to converge.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// Matrix or vector dimensions disagree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The selected entropy generator has no derivative where one is required.
    #[error("entropy generator `{0}` is not differentiable; use a smooth generator such as kl or js")]
    NotDifferentiable(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
