use std::path::PathBuf;

/// Failures of a harness command, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),

    /// `records` holds the epochs completed before the failure.
    #[error("training diverged at epoch {epoch}: {reason}")]
    Diverged { epoch: usize, reason: String, records: Vec<crate::metrics::MetricsRecord> },

    #[error(transparent)]
    Core(#[from] nsd_core::Error),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    /// Process exit code: 1 for configuration and input problems, 2 for
    /// numerical divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Diverged { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
