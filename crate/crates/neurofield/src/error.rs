use std::path::PathBuf;

use neurofield_core::Error as CoreError;

/// Failures surfaced by the command-line driver, each with its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Config(String),
    #[error("assumption violated: {0}")]
    Assumption(String),
    #[error("numerical failure: {0}")]
    Numeric(CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Config(_) => 2,
            CliError::Assumption(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn csv(path: impl Into<PathBuf>, e: csv::Error) -> Self {
        let path = path.into();
        match e.into_kind() {
            csv::ErrorKind::Io(source) => CliError::Io { path, source },
            other => CliError::Config(format!("{}: {other:?}", path.display())),
        }
    }
}

impl From<CoreError> for CliError {
    /// Parameter errors are configuration problems; a missing input
    /// excitation or an excess of switches contradicts the input assumptions.
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Parameter { .. } | CoreError::Order { .. } => CliError::Config(e.to_string()),
            CoreError::SingularSystem { .. } | CoreError::TooManySwitches { .. } => CliError::Assumption(e.to_string()),
            _ => CliError::Numeric(e),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
