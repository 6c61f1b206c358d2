//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by model construction, propagation, and optimization.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid physical or numerical configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Operands with incompatible dimensions.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// A numerical routine failed to converge or produced an invalid value.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Underlying dense linear-algebra backend failure.
    #[error("linear algebra backend: {0}")]
    LinAlg(#[from] ndarray_linalg::error::LinalgError),

    /// Filesystem or serialization failure.
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Convenience constructor for configuration errors.
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Convenience constructor for numerical failures.
    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
