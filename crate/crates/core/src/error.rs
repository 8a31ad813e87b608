use thiserror::Error;

/// Errors shared by every module of the engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// The arguments violate an operation's precondition.
    #[error("rejected input: {0}")]
    Rejected(String),

    /// An exhaustive search or construction would exceed its budget.
    #[error("budget exceeded in {stage}: limit {limit}")]
    Budget { stage: String, limit: u64 },

    /// A level above the object's truncation was requested.
    #[error("level {needed} unavailable (object known through level {available})")]
    LevelUnavailable { needed: usize, available: usize },

    /// Malformed serialized data.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn rejected(msg: impl Into<String>) -> Self {
        Error::Rejected(msg.into())
    }

    pub(crate) fn budget(stage: impl Into<String>, limit: u64) -> Self {
        Error::Budget {
            stage: stage.into(),
            limit,
        }
    }

    /// True for the resource-style failures (budget, truncation).
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Budget { .. } | Error::LevelUnavailable { .. })
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
