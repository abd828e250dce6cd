use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero matrix has no content")]
    ZeroMatrix,
    #[error("{0} is not prime")]
    NotPrime(String),
    #[error("argument out of range: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("gram matrix is not symmetric (or hermitian)")]
    NotSymmetric,
    #[error("form is not positive definite")]
    NotPositiveDefinite,
    #[error("bad prime {0}, use bad_primes")]
    BadPrime(u64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("value does not fit the machine-integer fast path: {0}")]
    Overflow(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("embedding residual {residual:e} above cap {cap:e}")]
    ResidualTooLarge { residual: f64, cap: f64 },
    #[error("empty sample")]
    EmptySample,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("self-check failed: {0}")]
    SelfCheck(String),
    #[error("sink failed after {emitted} emissions: {message}")]
    Sink { emitted: u64, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
