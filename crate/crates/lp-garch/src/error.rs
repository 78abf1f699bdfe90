//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by simulation, estimation, and the Monte Carlo harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates its domain (e.g. nonpositive variance intercept).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An input value is outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A variance specification and its exogenous terms are inconsistent.
    #[error("specification error: {0}")]
    Specification(String),

    /// The regressor carries no information (zero variance).
    #[error("singular regressor: {0}")]
    Singular(String),

    /// A recursive pipeline step was invoked before its inputs exist.
    #[error("pipeline order error: {0}")]
    PipelineOrder(String),

    /// Too few observations for the requested operation.
    #[error("insufficient data: need at least {required} observations, got {actual}")]
    InsufficientData { required: usize, actual: usize },

    /// A table lookup required a key that is not present.
    #[error("missing key: {0}")]
    MissingKey(String),

    /// The worker pool could not be constructed.
    #[error("worker pool error: {0}")]
    WorkerPool(String),
}

pub type Result<T> = std::result::Result<T, Error>;
