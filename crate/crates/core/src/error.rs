use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("exact evaluation needs non-negative integer exponents, got {0}")]
    NonIntegerExponent(f64),

    #[error("exact evaluation cap exceeded: total exponent {total} > cap {cap}")]
    ExactCapExceeded { total: u64, cap: u64 },

    #[error("linear system is numerically singular at y = {y} (determinant {det:e})")]
    Singular { y: f64, det: f64 },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("step budget of {steps} exhausted at t = {t}")]
    StepBudget { t: f64, steps: usize },

    #[error("bound `{bound}` violated at t = {t}: value {value} vs limit {limit}")]
    BoundViolation {
        bound: &'static str,
        t: f64,
        value: f64,
        limit: f64,
    },

    #[error("t = {t} is outside the available range [{min}, {max}]")]
    OutOfRange { t: f64, min: f64, max: f64 },

    #[error("invalid path: {0}")]
    Path(String),

    #[error("transported value left the representable log-odds range at s = {s}")]
    Underflow { s: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
