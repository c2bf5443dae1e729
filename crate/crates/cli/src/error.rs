use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] archam_core::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }

    /// 2 for usage and configuration problems, 3 for runtime or numeric aborts.
    pub fn exit_code(&self) -> i32 {
        use archam_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(E::InvalidConfig(_) | E::InvalidGrid(_) | E::StepOutOfRange(_) | E::LengthMismatch { .. }) => 2,
            CliError::Json(_) => 2,
            _ => 3,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
