use alloc::string::String;

/// Errors raised by the core operations.
///
/// Precondition failures carry a message naming the violated condition
/// (for instance `"h > 1/beta"`) so front ends can echo it verbatim.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("grids differ: {0}")]
    GridMismatch(String),

    #[error("grid too small: mass leak {leak:e} exceeds {limit:e}")]
    GridTooSmall { leak: f64, limit: f64 },

    #[error("rejection sampler gave up after {tries} proposals")]
    RejectionExhausted { tries: u64 },

    #[error("non-finite input")]
    NonFinite,

    #[error("empty input")]
    Empty,
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
