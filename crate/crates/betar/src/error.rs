//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Vector/matrix dimensions do not line up.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// Observations outside the open unit interval; indices are 0-based.
    #[error("series values outside (0,1) at rows {0:?}")]
    SeriesDomain(Vec<usize>),

    /// A rejection sampler exhausted its attempt budget, which signals
    /// pathological hyperparameters rather than bad luck.
    #[error("rejection sampling budget exhausted after {attempts} attempts")]
    RejectionBudget { attempts: usize },

    /// Invalid sampler or experiment configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A numerical procedure failed in a way retries cannot fix.
    #[error("numerical failure: {0}")]
    Numerical(String),
}
