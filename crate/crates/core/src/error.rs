use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value {value} in {context}")]
    NonFinite { value: f64, context: &'static str },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("domain error: {0}")]
    Domain(String),

    /// Two routes that must agree did not. Surfaced rather than swallowed so
    /// callers and tests can see it.
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_finite(value: f64, context: &'static str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { value, context })
    }
}

pub(crate) fn check_all_finite(values: &[f64], context: &'static str) -> Result<()> {
    for &v in values {
        check_finite(v, context)?;
    }
    Ok(())
}

pub(crate) fn check_same_dim(left: &[f64], right: &[f64]) -> Result<()> {
    if left.len() != right.len() {
        return Err(Error::DimensionMismatch {
            left: left.len(),
            right: right.len(),
        });
    }
    Ok(())
}
