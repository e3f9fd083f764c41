use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {msg}")]
    Config { path: String, msg: String },
    #[error("scenario {scenario}: {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: nilgrowth::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    /// Process exit code: 2 for unusable input, 3 when a state cap is hit,
    /// 4 when an internal assertion fails, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use nilgrowth::Error as E;
        match self {
            CliError::Config { .. } => 2,
            CliError::Scenario { source, .. } => match source {
                E::CapExceeded { .. } => 3,
                E::Assertion(_) => 4,
                E::Overflow(_) => 1,
                _ => 2,
            },
            CliError::Io { .. } | CliError::Csv(_) => 1,
        }
    }
}
