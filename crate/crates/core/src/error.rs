use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("integration diverged at t = {time_us} us")]
    IntegrationDiverged { time_us: f64 },

    #[error("positivity violation at step {step}, basis index {index}: population {value:e}")]
    PositivityViolation { step: usize, index: usize, value: f64 },

    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("readout mitigation unreliable: condition number {condition_number:e}")]
    MitigationUnreliable { condition_number: f64 },

    #[error("incomplete readout calibration: missing prepared state(s) {missing:?}")]
    IncompleteCalibration { missing: Vec<usize> },

    #[error("record mismatch: {0}")]
    RecordMismatch(String),

    #[error("loss evaluation failed at parameters {params:?}: {source}")]
    LossEvaluation {
        params: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("non-finite loss while probing gradient slot {slot}")]
    GradientProbe { slot: String },

    #[error("fit failed: every restart diverged ({diagnostics})")]
    FitFailed { diagnostics: String },

    #[error("no qubit is shared between the supplied subsystem fits")]
    NothingToCompare,

    #[error("no coupling estimate available for pair ({0}, {1})")]
    MissingCoupling(usize, usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
