use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state became non-finite at tau = {tau}")]
    NonFiniteState { tau: f64 },

    #[error("requested {requested} steps, budget is {budget}")]
    StepBudgetExceeded { requested: usize, budget: usize },

    #[error("trajectory length mismatch: {left} vs {right} samples")]
    LengthMismatch { left: usize, right: usize },

    #[error("step size mismatch: {left} vs {right}")]
    StepMismatch { left: f64, right: f64 },

    #[error("empty error sequence")]
    EmptySequence,

    #[error("invalid bounds on dimension {dim}: [{lo}, {hi}]")]
    InvalidBounds { dim: usize, lo: f64, hi: f64 },

    #[error("unknown scenario id {0}")]
    UnknownScenario(u32),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("parameter vector has length {got}, expected {expected} for {kind}")]
    ParamLength {
        kind: &'static str,
        expected: usize,
        got: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
