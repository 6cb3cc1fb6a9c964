use std::path::PathBuf;

use crate::types::SensorId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the orchestrator can surface.
///
/// Variants map one-to-one onto the error names used by the agents, the
/// supervisor and the persistence layers so callers can match on them.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("schema violation ({schema}): {reason}")]
    SchemaViolation { schema: String, reason: String },

    #[error("provider unavailable: {0}")]
    ProviderUnavailable(String),

    #[error("no scripted rule matches {0:?}")]
    NoRule(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("degenerate (zero) embedding vector")]
    DegenerateVector,

    #[error("persistence failure at {path}: {reason}")]
    Persistence { path: PathBuf, reason: String },

    #[error("corrupt memory store {path}: {reason}")]
    CorruptStore { path: PathBuf, reason: String },

    #[error("corrupt process table {path}: {reason}")]
    CorruptTable { path: PathBuf, reason: String },

    #[error("no active task")]
    NoActiveTask,

    #[error("no detail unit matches {0:?}")]
    NoMatchingDetail(String),

    #[error("unknown skill {0:?}")]
    UnknownSkill(String),

    #[error("unknown sensor {0:?}")]
    UnknownSensor(String),

    #[error("sensor {0} is already bound")]
    AlreadyBound(SensorId),

    #[error("sensor {0} is not bound")]
    NotBound(SensorId),

    #[error("failed to spawn worker for {0}")]
    SpawnFailure(SensorId),

    #[error("robot unreachable: {0}")]
    RobotUnreachable(String),

    #[error("bad robot request: {0}")]
    BadRequest(String),

    #[error("insufficient diversity: {0}")]
    InsufficientDiversity(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn schema(schema: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::SchemaViolation { schema: schema.into(), reason: reason.into() }
    }

    /// Short machine-readable name used in traces and API responses.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "InvalidInput",
            Error::SchemaViolation { .. } => "SchemaViolation",
            Error::ProviderUnavailable(_) => "ProviderUnavailable",
            Error::NoRule(_) => "NoRule",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::DegenerateVector => "DegenerateVector",
            Error::Persistence { .. } => "PersistenceFailure",
            Error::CorruptStore { .. } => "CorruptStore",
            Error::CorruptTable { .. } => "CorruptTable",
            Error::NoActiveTask => "NoActiveTask",
            Error::NoMatchingDetail(_) => "NoMatchingDetail",
            Error::UnknownSkill(_) => "UnknownSkill",
            Error::UnknownSensor(_) => "UnknownSensor",
            Error::AlreadyBound(_) => "AlreadyBound",
            Error::NotBound(_) => "NotBound",
            Error::SpawnFailure(_) => "SpawnFailure",
            Error::RobotUnreachable(_) => "RobotUnreachable",
            Error::BadRequest(_) => "BadRequest",
            Error::InsufficientDiversity(_) => "InsufficientDiversity",
            Error::Io(_) => "Io",
        }
    }
}

/// A failed turn together with the calls made before the failure.
#[derive(Debug)]
pub struct Failed {
    pub error: Error,
    pub trace: crate::types::ExecutionTrace,
}

impl std::fmt::Display for Failed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for Failed {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}
