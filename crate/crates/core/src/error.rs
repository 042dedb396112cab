use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("values are not weakly decreasing: entry {index} exceeds its predecessor")]
    Monotonicity { index: usize },

    #[error("negative value {value} at index {index}")]
    NegativeValue { index: usize, value: f64 },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("length error: {0}")]
    Length(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("out of range: {0}")]
    Range(String),

    #[error("the tensor is identically zero")]
    ZeroTensor,

    #[error("trace property violated: norms {left} and {right} differ")]
    Trace { left: f64, right: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("singular scaling: {0}")]
    Singular(String),

    #[error("construction failed for mode {mode}: {reason}")]
    Construction { mode: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
