use thiserror::Error;

/// Errors raised by the recovery toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecoveryError {
    #[error("size mismatch: {left} versus {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("support points are not pairwise distinct")]
    NotDistinct,

    #[error("input size {n} exceeds the supported maximum {max}")]
    TooLarge { n: usize, max: usize },

    #[error("assumption violated: {0}")]
    AssumptionViolation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, RecoveryError>;

pub(crate) fn ensure_same_len(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(RecoveryError::SizeMismatch { left, right })
    }
}
