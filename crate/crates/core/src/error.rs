use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("level {level} out of range (filtration depth {depth})")]
    LevelOutOfRange { level: usize, depth: usize },

    #[error("coordinate {coord} out of range (space has {dims} coordinates)")]
    CoordinateOutOfRange { coord: usize, dims: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operands live on different spaces")]
    SpaceMismatch,

    #[error("non-finite value at point {0}")]
    NonFinite(usize),

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("sequence is not adapted at level {level}")]
    NotAdapted { level: usize },

    #[error("not a martingale: {0}")]
    NotMartingale(String),

    #[error("invalid stopping time: {0}")]
    InvalidStoppingTime(String),

    #[error("invalid envelope: {0}")]
    InvalidEnvelope(String),

    #[error("invalid transform multiplier at index {index}: {reason}")]
    InvalidMultiplier { index: usize, reason: String },

    #[error("martingale must start at zero (d_0 f = 0) for atomic decomposition")]
    NonzeroStart,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}
