use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("resource error: {0}")]
    Resource(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("validation failed: {0}")]
    ValidationFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Internal(_) | CliError::ValidationFailed(_) => 1,
        }
    }

    /// Wraps a core error raised while checking a named config field.
    pub fn field(field: &str, err: tpdyn::Error) -> Self {
        CliError::Config(format!("{field}: {err}"))
    }
}

impl From<tpdyn::Error> for CliError {
    fn from(err: tpdyn::Error) -> Self {
        if err.is_resource() {
            CliError::Resource(err.to_string())
        } else {
            CliError::Internal(err.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) fn ensure(cond: bool, what: impl FnOnce() -> String) -> CliResult<()> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Internal(what()))
    }
}
