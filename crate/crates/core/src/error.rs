use thiserror::Error;

/// Errors raised by the matrix, statistics, and number-theory operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument lies outside the supported range, or a result would not fit in 64 bits.
    #[error("range error: {0}")]
    Range(String),
    /// The inputs are outside the domain of the operation (e.g. a non-invertible residue).
    #[error("domain error: {0}")]
    Domain(String),
    /// A statistic was requested over an empty sample.
    #[error("undefined statistic: {0}")]
    UndefinedStatistic(String),
}

pub type Result<T> = std::result::Result<T, Error>;
