use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid key identifier {0:?}")]
    InvalidKey(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("non-monotonic timestamp for key {key}: t_ms {previous} followed by {current}")]
    NonMonotonic { key: String, previous: u64, current: u64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid press script: segment {index} ({kind}): {reason}")]
    InvalidScript {
        index: usize,
        kind: &'static str,
        reason: String,
    },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("invalid menu: {0}")]
    InvalidMenu(String),

    #[error("incomplete transcript: {0}")]
    IncompleteTranscript(String),

    #[error("trial needs {needed} attempts but only {got} were supplied")]
    NotEnoughAttempts { needed: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by the content of input data rather than by
    /// the environment (missing files, broken pipes).
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}
