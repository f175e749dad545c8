use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, malformed or inconsistent configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// A computation ran and a check failed.
    #[error("check failed: {0}")]
    Check(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Check(_) => 1,
            _ => 2,
        }
    }
}

impl From<twistcalc::Error> for CliError {
    fn from(e: twistcalc::Error) -> Self {
        CliError::Check(e.to_string())
    }
}

/// Errors raised while building the model count as configuration errors.
pub trait SetupExt<T> {
    fn setup(self) -> Result<T, CliError>;
}

impl<T> SetupExt<T> for twistcalc::Result<T> {
    fn setup(self) -> Result<T, CliError> {
        self.map_err(|e| CliError::Config(e.to_string()))
    }
}
