use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Schema or value error in the scenario file, with the offending field path.
    #[error("invalid configuration at {path}: {message}")]
    Config { path: String, message: String },

    #[error("numerical failure in {op}: {source}")]
    Numerical {
        op: &'static str,
        #[source]
        source: plasmon_core::Error,
    },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numerical { .. } | CliError::Verification(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

/// Tags a core error with the module and operation that raised it.
pub trait OpContext<T> {
    fn op(self, op: &'static str) -> Result<T, CliError>;
}

impl<T> OpContext<T> for plasmon_core::Result<T> {
    fn op(self, op: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numerical { op, source })
    }
}
