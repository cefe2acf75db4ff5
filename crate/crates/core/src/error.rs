use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("outcome count must be at least 2, got {0}")]
    InvalidOutcomeCount(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("strategy component {value} out of range for d = {d}")]
    StrategyOutOfRange { value: usize, d: usize },
    #[error("space mismatch: expected {expected}, got {actual}")]
    SpaceMismatch { expected: String, actual: String },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("zero coefficient vector cannot be canonicalized")]
    ZeroInequality,
    #[error("invalid r/s/t/u tuple {0:?}: {1}")]
    InvalidRstu([i64; 4], String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("symmetry group of order {0} exceeds the limit; pass the large-group flag to allow it")]
    GroupTooLarge(u128),
    #[error("linear program failed: {0}")]
    Lp(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
