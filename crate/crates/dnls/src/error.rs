use crate::pde::PdeError;

/// Failures of a batch run, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("i/o: {0}")]
    Io(String),
    #[error("config: {0}")]
    Config(String),
    #[error("numeric: {0}")]
    Numeric(String),
}

impl AppError {
    /// 1 for numerical failures, 2 for anything about inputs or outputs.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Numeric(_) => 1,
            AppError::Io(_) | AppError::Config(_) => 2,
        }
    }
}

impl From<dnls_core::Error> for AppError {
    fn from(e: dnls_core::Error) -> Self {
        AppError::Numeric(e.to_string())
    }
}

impl From<PdeError> for AppError {
    fn from(e: PdeError) -> Self {
        AppError::Numeric(e.to_string())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e.to_string())
    }
}

impl From<csv::Error> for AppError {
    fn from(e: csv::Error) -> Self {
        AppError::Io(e.to_string())
    }
}
