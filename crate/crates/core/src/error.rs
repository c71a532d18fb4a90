use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter outside the admissible domain: {0}")]
    ParameterDomain(String),
    #[error("slow-down phase of length {duration} does not fit before the acceleration slot (needs < 1/2); use flexible mode or k >= 2^12")]
    PackingViolation { duration: f64 },
    #[error("frequency floor violated: {0}")]
    FrequencyFloor(String),
    #[error("field does not solve the constant-coefficient equation: {0}")]
    IncompatibleField(String),
    #[error("integrator error estimate {estimate:e} exceeds budget {budget:e}")]
    OdeTolerance { estimate: f64, budget: f64 },
    #[error("degenerate oscillation match: |alpha| + |beta| underflowed")]
    DegenerateMatch,
    #[error("time {t} outside [{start}, {end}]")]
    OutOfInterval { t: f64, start: f64, end: f64 },
    #[error("unreadable construction or report: {0}")]
    Format(String),
    #[error("operation needs a {expected} timeline, got {found}")]
    WrongKind { expected: &'static str, found: String },
}

pub type Result<T> = std::result::Result<T, Error>;
