use thiserror::Error;

/// Errors raised when constructing or evaluating game objects.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LottoError {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("invalid call policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid multistage instance: {0}")]
    InvalidInstance(String),

    #[error("grid size {0} is below the minimum of {min}", min = crate::verification::MIN_GRID_SIZE)]
    GridTooSmall(usize),

    #[error("invalid axis: {0}")]
    InvalidAxis(String),

    #[error("{0}")]
    OutOfDomain(String),
}

pub type Result<T> = std::result::Result<T, LottoError>;

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(LottoError::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}
