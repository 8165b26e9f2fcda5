//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by configuration validation, shape checks, and numerics.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates its documented range or consistency rule.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// An input's length does not match the expected dimension.
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// A value that must be finite is NaN or infinite.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Training produced a non-finite loss or parameter and was aborted.
    #[error("numerical failure at step {step}: {detail}")]
    Diverged { step: u64, detail: String },

    /// A serialized artifact (checkpoint, matrix file) failed validation.
    #[error("invalid format: {0}")]
    InvalidFormat(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(context: &'static str, expected: usize, got: usize) -> Self {
        Error::DimensionMismatch {
            context,
            expected,
            got,
        }
    }
}
