use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    /// Motion-model hypotheses or the Bolker check failed.
    #[error("{0} (rerun with --force to continue anyway)")]
    Check(String),

    #[error("{0}")]
    Io(String),

    #[error(transparent)]
    Library(#[from] dynaray::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Check(_) => 3,
            CliError::Io(_) => 4,
            CliError::Library(e) => match e {
                dynaray::Error::Io { .. } | dynaray::Error::Format { .. } => 4,
                _ => 2,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
