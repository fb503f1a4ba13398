use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coordinate at position {0}")]
    NonFinite(usize),

    #[error("operation requires a nonempty family")]
    EmptyFamily,

    #[error("family does not sum to zero: |sum| = {norm:e} exceeds tolerance {tol:e}")]
    NotZeroSum { norm: f64, tol: f64 },

    #[error("vector {index} has norm {norm} above the allowed {limit}")]
    NormExceeded { index: usize, norm: f64, limit: f64 },

    #[error("invalid ordering: {0}")]
    InvalidOrdering(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("instance of size {n} exceeds the cap of {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("postcondition violated: {0}")]
    Postcondition(String),

    #[error("value underflows in linear space; use the log-space accessor")]
    Underflow,
}
