use touchcap_core::ModelError;

/// Process exit statuses.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    /// A check failed, the configuration is invalid or a fit did not converge.
    pub const FAILURE: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{source_name}: {message}")]
    Parse {
        source_name: String,
        message: String,
    },

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Io { .. } | CliError::Parse { .. } => exit::IO,
            CliError::Config(_) | CliError::Model(_) | CliError::Failed(_) => exit::FAILURE,
        }
    }
}
