use std::path::PathBuf;

/// Failures split by the exit code they map to.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Walk(#[from] cyclewalk::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("thread pool: {0}")]
    Pool(String),
}

impl CliError {
    /// `1` for bad input, `2` for resource problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Walk(_) | CliError::Parse { .. } => 1,
            CliError::Io { .. } | CliError::Pool(_) => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    pub(crate) fn parse<E: std::fmt::Display>(
        path: impl Into<PathBuf>,
    ) -> impl FnOnce(E) -> CliError {
        let path = path.into();
        move |e| CliError::Parse {
            path,
            message: e.to_string(),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
