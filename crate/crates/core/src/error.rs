use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SfmError {
    #[error("mismatched diamond sizes: {0} vs {1}")]
    KMismatch(usize, usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("enumeration of {needed} items exceeds budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("iteration cap {0} reached")]
    IterationCap(usize),
    #[error("internal invariant broken: {0}")]
    Internal(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
}

pub type Result<T> = std::result::Result<T, SfmError>;

pub(crate) fn internal<T>(msg: impl Into<String>) -> Result<T> {
    Err(SfmError::Internal(msg.into()))
}

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(SfmError::Precondition(msg.into()))
}
