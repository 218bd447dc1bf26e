use std::path::PathBuf;

pub type Result<T, E = RunError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] torwalk_core::Error),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Parse { path: PathBuf, msg: String },
}

impl RunError {
    pub fn config(msg: impl Into<String>) -> Self {
        RunError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RunError::Io { path: path.into(), source }
    }

    /// 0 ok, 1 config, 2 numerical or verification failure, 3 resource abort.
    pub fn exit_code(&self) -> i32 {
        use torwalk_core::Error as E;
        match self {
            RunError::Config(_) | RunError::Io { .. } | RunError::Parse { .. } => 1,
            RunError::Core(E::Parameter { .. } | E::Input(_)) => 1,
            RunError::Core(E::Resource { .. }) => 3,
            RunError::Core(E::Numerical(_) | E::Normalization(_)) => 2,
            RunError::Verification(_) => 2,
        }
    }
}
