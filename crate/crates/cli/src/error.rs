use std::path::PathBuf;

use thiserror::Error;

/// Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 failed bound
/// check or numerical breakdown, 4 element budget exceeded.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] bergman_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to write {path}: {message}")]
    Output { path: PathBuf, message: String },
    #[error("{failed} of {total} bound checks failed")]
    ChecksFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use bergman_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } | CliError::Output { .. } => 1,
            CliError::ChecksFailed { .. } => 3,
            CliError::Core(E::BudgetExceeded { .. }) => 4,
            CliError::Core(
                E::DegenerateKernel(_) | E::NonPositiveKernel(_) | E::StepUnderflow(_),
            ) => 3,
            CliError::Core(_) => 2,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
