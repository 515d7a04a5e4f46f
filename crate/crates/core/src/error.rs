use thiserror::Error;

/// Errors raised by parsers and scoring operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A record in a line-oriented input could not be accepted.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A structured record (JSON instance, CSV row) failed validation.
    /// Records are numbered from 1.
    #[error("record {record}: {message}")]
    Record { record: usize, message: String },

    /// Inputs are well-formed but violate an operation's precondition.
    #[error("{0}")]
    Invalid(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }

    pub(crate) fn record(record: usize, message: impl Into<String>) -> Self {
        Error::Record { record, message: message.into() }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::Invalid(message.into())
    }

    /// True when the error stems from user-supplied input rather than the toolkit.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
