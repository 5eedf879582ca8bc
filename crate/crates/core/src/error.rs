use thiserror::Error;

/// Errors raised by the coding, decoding and simulation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlccError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("reference matrix has zero norm")]
    ZeroNormReference,

    #[error("locator system is degenerate (rank {rank} < {expected})")]
    DegenerateSystem { rank: usize, expected: usize },

    #[error("candidate set of size {size} is smaller than the largest locator degree {needed}")]
    CandidatesTooSmall { size: usize, needed: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, AlccError>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> AlccError {
    AlccError::InvalidParams {
        field,
        reason: reason.into(),
    }
}
