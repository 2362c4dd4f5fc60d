use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid binning scheme: {0}")]
    InvalidBinning(String),

    #[error("invalid scenario: {field}: {reason}")]
    InvalidScenario { field: &'static str, reason: String },

    #[error("variance must be positive and finite, got {0}")]
    NonPositiveVariance(f64),

    #[error("bin index {index} out of range for {bin_count} bins")]
    BinOutOfRange { index: usize, bin_count: usize },

    #[error("empty distribution")]
    EmptyDistribution,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("no guess records to aggregate")]
    NoRecords,

    #[error("hash matrix dimension mismatch: expected {expected} input bits, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid hash matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
