use thiserror::Error;

/// Errors raised by field arithmetic, matrix algebra, and the estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operands belong to different field specs")]
    SpecMismatch,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("division by zero")]
    DivisionByZero,
    /// A value's tracked digit window does not cover the positions a
    /// computation needs. Character sums are exact-or-nothing, so this is a
    /// hard error, never a silent approximation.
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    /// Elimination shifted digits below the precision window shared by a
    /// matrix, so the result can no longer be trusted.
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("matrix is not skew-symmetric within tracked precision")]
    NotSkew,
    #[error("expected an even dimension, got {0}")]
    OddDimension(usize),
    #[error("element is not integral")]
    NotIntegral,
    #[error("invalid field spec: {0}")]
    InvalidFieldSpec(String),
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("enumeration budget exceeded: {points} points > {budget}")]
    BudgetExceeded { points: u128, budget: u128 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
