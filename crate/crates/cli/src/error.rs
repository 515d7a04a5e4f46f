use std::fmt;

/// Failure of a command, split by the exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: malformed files, missing paths, out-of-range parameters.
    #[error("{0}")]
    Validation(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Internal(_) => 1,
        }
    }

    pub(crate) fn invalid(msg: impl fmt::Display) -> Self {
        CliError::Validation(msg.to_string())
    }

    pub(crate) fn internal(msg: impl fmt::Display) -> Self {
        CliError::Internal(msg.to_string())
    }
}

impl From<campaign_eval::Error> for CliError {
    fn from(e: campaign_eval::Error) -> Self {
        if e.is_input_error() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Internal(e.to_string())
        }
    }
}

/// Attaches a file or unit name to errors.
pub(crate) trait Context<T> {
    fn context(self, what: impl fmt::Display) -> Result<T, CliError>;
}

impl<T, E: Into<CliError>> Context<T> for Result<T, E> {
    fn context(self, what: impl fmt::Display) -> Result<T, CliError> {
        self.map_err(|e| match e.into() {
            CliError::Validation(m) => CliError::Validation(format!("{what}: {m}")),
            CliError::Internal(m) => CliError::Internal(format!("{what}: {m}")),
        })
    }
}
