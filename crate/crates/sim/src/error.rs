use std::fmt;

use contact_core::Error as CoreError;

/// Failure of a command, carrying its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure in {operation}: {source}")]
    Numerical {
        operation: &'static str,
        #[source]
        source: CoreError,
    },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerificationFailed(_) => 1,
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numerical { .. } => 3,
        }
    }

    pub fn config(msg: impl fmt::Display) -> Self {
        CliError::Config(msg.to_string())
    }

    /// Sorts a core error into config or numerical failure.
    pub fn from_core(operation: &'static str, e: CoreError) -> Self {
        match e {
            CoreError::SingularChartPoint { .. }
            | CoreError::Domain { .. }
            | CoreError::MidpointDivergence { .. } => CliError::Numerical { operation, source: e },
            other => CliError::Config(format!("{operation}: {other}")),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// `.op("integrate")?` on core results.
pub trait CoreResultExt<T> {
    fn op(self, operation: &'static str) -> CliResult<T>;
}

impl<T> CoreResultExt<T> for contact_core::Result<T> {
    fn op(self, operation: &'static str) -> CliResult<T> {
        self.map_err(|e| CliError::from_core(operation, e))
    }
}
