use thiserror::Error;

/// Errors raised by grid, measure, free-energy and flow operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("negative density {value} at index {index}")]
    NegativeDensity { index: usize, value: f64 },

    #[error("measure has zero total mass")]
    ZeroMass,

    #[error("not a probability measure (total mass {mass})")]
    NotProbability { mass: f64 },

    #[error("Q is not absolutely continuous w.r.t. P at index {index}")]
    NotAbsolutelyContinuous { index: usize },

    #[error("arc parameter {0} outside [0, 1]")]
    StepOutOfRange(f64),

    #[error("domain violation: f < log w at {count} grid point(s), first at index {first}")]
    DomainViolation { count: usize, first: usize },

    #[error("inadmissible direction: {0}")]
    InadmissibleDirection(String),

    #[error("numeric abort at step {step}: {reason}")]
    NumericAbort { step: usize, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty energy series")]
    EmptySeries,
}

pub type Result<T> = std::result::Result<T, Error>;
