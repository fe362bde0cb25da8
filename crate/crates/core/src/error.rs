//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator expectation has non-negligible imaginary part {imag:.3e}")]
    NonHermitian { imag: f64 },

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("empty series after dropping {dropped} transient samples")]
    EmptySeries { dropped: usize },

    #[error("need at least {needed} values, got {got}")]
    TooFewValues { needed: usize, got: usize },

    #[error("no root found in bracket [{lo}, {hi}]")]
    NoRootInBracket { lo: f64, hi: f64 },
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Eigensolver(e.to_string())
    }
}
