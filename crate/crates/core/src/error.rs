use thiserror::Error;

/// Error type shared across the pipeline stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("http transport error: {0}")]
    Transport(String),

    #[error("remote API failure (status {status}): {message}")]
    Remote { status: u16, message: String },

    #[error("xml conversion error at byte {offset}: {message}")]
    Xml { offset: usize, message: String },

    #[error("missing document for application {application_id}: {missing}")]
    MissingDocument {
        application_id: String,
        missing: String,
    },

    #[error("extraction failed for application {application_id}: {reason}")]
    ExtractionFailure {
        application_id: String,
        reason: String,
    },

    #[error("llm response violates protocol: {0}")]
    Protocol(String),

    #[error("judge grade tokens absent from top log-probabilities")]
    GradeExtraction,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("single-class input: training requires both classes")]
    SingleClass,

    #[error("insufficient definite claims: needed {needed}, available {available}")]
    InsufficientClaims { needed: usize, available: usize },

    #[error("too few applications to split: {0}")]
    TooFewApplications(usize),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
