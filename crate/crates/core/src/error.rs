use thiserror::Error;

/// Errors raised by kernel construction, evaluation and verification.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid input: dimension mismatch, bad parameters, malformed families.
    #[error("domain error: {0}")]
    Domain(String),
    /// A computation produced a non-finite value.
    #[error("numerics error: {0}")]
    Numerics(String),
    /// A quantity that must be nonnegative for a PSD kernel was negative
    /// beyond tolerance.
    #[error("kernel is not positive semidefinite: {what} = {value:e} (tolerance {tolerance:e})")]
    PsdViolation {
        what: String,
        value: f64,
        tolerance: f64,
    },
    #[error("kernel carries no separate Hölder data")]
    NoRegularityData,
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
