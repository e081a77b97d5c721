use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("negative weight {value} at index {index}")]
    NegativeWeight { index: usize, value: f64 },
    #[error("all weights are zero")]
    ZeroTotal,
    #[error("expected {expected} entries, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("probabilities sum to {sum}, not 1")]
    NotNormalized { sum: f64 },
    #[error("operands live on different outcome spaces")]
    SpaceMismatch,
    #[error("outcome space is invalid: {0}")]
    InvalidSpace(String),
    #[error("event has zero probability")]
    ZeroProbabilityEvent,
    #[error("no credal member assigns positive probability to the event")]
    AllMembersZero,
    #[error("credal set has no members")]
    EmptyCredalSet,
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("every base particle gives the conditioning event zero probability")]
    AllDropped,
    #[error("finite-difference step {step} does not fit in dimension {dim}")]
    StepTooLarge { dim: usize, step: f64 },
    #[error("family has zero total thickness; the TV-uniform measure is undefined")]
    DegenerateFamily,
    #[error("observed event has zero marginal probability")]
    ZeroEvidence,
    #[error("impossible history: {0}")]
    ImpossibleHistory(String),
    #[error("hypothesis kind does not match the measure")]
    HypothesisMismatch,
}
