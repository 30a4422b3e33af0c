use thiserror::Error;

/// Failures of a CLI run, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("inadmissible geometry: {0}")]
    Admissibility(String),

    #[error("solver did not converge: {0}")]
    NotConverged(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Admissibility(_) => 3,
            CliError::NotConverged(_) => 4,
            CliError::Verification(_) => 5,
            CliError::Io(_) => 1,
        }
    }
}

impl From<lnl_core::Error> for CliError {
    fn from(e: lnl_core::Error) -> Self {
        use lnl_core::Error as E;
        match e {
            E::NotConverged { .. } | E::NonFinite(_) => CliError::NotConverged(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
