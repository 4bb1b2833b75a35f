use std::fmt;

use infogeo::GeoError;

/// Failure of a subcommand, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable, malformed or inconsistent configuration.
    Config(String),
    /// A computation failed after the configuration was accepted.
    Numerical(GeoError),
    /// One or more acceptance criteria failed.
    Verification(Vec<u32>),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(e) => write!(f, "numerical error: {e}"),
            CliError::Verification(ids) => write!(f, "verification failed for criteria {ids:?}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<GeoError> for CliError {
    fn from(e: GeoError) -> Self {
        CliError::Numerical(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Errors raised while building a model from accepted values are configuration problems.
pub(crate) fn config_err(e: GeoError) -> CliError {
    CliError::Config(e.to_string())
}
