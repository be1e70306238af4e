use std::path::{Path, PathBuf};

use thiserror::Error;

/// Failures of a CLI stage. The exit code partitions them into schema/config problems (2),
/// missing upstream artifacts (3), missing report inputs (4) and everything else (1).
#[derive(Debug, Error)]
pub enum CliError {
    #[error("[{stage}] {source}")]
    Schema {
        stage: &'static str,
        #[source]
        source: avfrontier::Error,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("[{stage}] missing upstream artifact {path} (run `{upstream}` first)")]
    MissingUpstream { stage: &'static str, upstream: &'static str, path: PathBuf },

    #[error("[report] missing {path} from stage `{upstream}`")]
    ReportDependency { upstream: &'static str, path: PathBuf },

    #[error("[{stage}] {path}: {source}")]
    Io {
        stage: &'static str,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("[{stage}] {source}")]
    Internal {
        stage: &'static str,
        #[source]
        source: avfrontier::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema { .. } | CliError::Config(_) => 2,
            CliError::MissingUpstream { .. } => 3,
            CliError::ReportDependency { .. } => 4,
            CliError::Io { .. } | CliError::Internal { .. } => 1,
        }
    }

    pub fn io(stage: &'static str, path: &Path, source: std::io::Error) -> Self {
        CliError::Io { stage, path: path.to_path_buf(), source }
    }

    /// Attach a stage name to a library error, classifying input-shape problems as schema
    /// errors.
    pub fn from_core(stage: &'static str, e: avfrontier::Error) -> Self {
        use avfrontier::Error as E;
        match e {
            E::MissingColumn(_) | E::Schema(_) | E::TimeGrid { .. } | E::Csv(_) => {
                CliError::Schema { stage, source: e }
            }
            E::Config(msg) => CliError::Config(format!("[{stage}] {msg}")),
            other => CliError::Internal { stage, source: other },
        }
    }
}

impl From<avfrontier::Error> for CliError {
    fn from(e: avfrontier::Error) -> Self {
        CliError::from_core("config", e)
    }
}
