use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not unitary: max |U^dagger U - I| = {residual:e} exceeds tolerance {tol:e}")]
    NotUnitary { residual: f64, tol: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("dimension {got} too small, need at least {need}")]
    DimensionTooSmall { got: usize, need: usize },

    #[error("{what} of size {size} exceeds the configured cap {cap}")]
    SizeLimit { what: &'static str, size: usize, cap: usize },

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("factorial of {0} overflows 64-bit integers")]
    Overflow(usize),

    #[error("generating-function denominator is numerically singular (|det| = {0:e})")]
    SingularDenominator(f64),

    #[error("unsupported pattern: {0}")]
    UnsupportedPattern(String),

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("{0} is not finite (overflow)")]
    NumericOverflow(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
