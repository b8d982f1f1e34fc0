use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// The input parsed but failed a check, or an analysis precondition.
    pub const FAILURE: i32 = 1;
    /// Malformed filter file or command line.
    pub const PARSE: i32 = 2;
    /// Reading inputs or writing reports failed.
    pub const IO: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Library(#[from] transop::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Usage(_) => exit::PARSE,
            CliError::Io(_) => exit::IO,
            CliError::Failed(_) | CliError::Library(_) => exit::FAILURE,
        }
    }
}
