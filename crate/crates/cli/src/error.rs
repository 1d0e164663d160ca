use thiserror::Error;

/// Exit code 1.
pub const EXIT_FAIL: i32 = 1;
/// Exit code 2.
pub const EXIT_INPUT: i32 = 2;
/// Exit code 3.
pub const EXIT_NONCONVERGENCE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
    #[error(transparent)]
    Math(#[from] dispersio::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Math(dispersio::Error::InvalidInput(_)) => EXIT_INPUT,
            CliError::Math(_) => EXIT_FAIL,
            _ => EXIT_INPUT,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
