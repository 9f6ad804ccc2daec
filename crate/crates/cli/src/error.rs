use std::io;

use serde_json::json;

/// Failure of a subcommand, mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Invalid configuration or flags. Nothing has been written.
    #[error("{0}")]
    Config(String),
    /// A required run diverged. Outputs and manifest are written.
    #[error("{0}")]
    Diverged(String),
    #[error(transparent)]
    Core(#[from] aggmo_core::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub fn io(context: impl Into<String>, source: io::Error) -> Self {
        Self::Io {
            context: context.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::Diverged(_) => "diverged",
            Self::Core(_) => "runtime",
            Self::Io { .. } | Self::Csv(_) | Self::Json(_) => "io",
        }
    }

    /// 2 for configuration errors, 3 for divergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Diverged(_) => 3,
            _ => 1,
        }
    }

    /// Machine-readable error record.
    pub fn record(&self) -> serde_json::Value {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
