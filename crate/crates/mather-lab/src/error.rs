//! Harness-level errors and their mapping to process exit codes.
//!
//! The contract: exit 0 on success, 2 for configuration problems, 3 for
//! computation failures, 4 for I/O failures. On any failure the binary
//! prints a single-line machine-readable JSON record to stderr (see
//! [`LabError::record`]) in addition to exiting nonzero.

use serde::Serialize;

/// Exit code for configuration/validation errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for computation errors.
pub const EXIT_COMPUTE: i32 = 3;
/// Exit code for I/O errors.
pub const EXIT_IO: i32 = 4;

/// Anything that can abort a run. Per-cell computation failures do *not*
/// abort runs — they are recorded in the row's `flag` column; this type is
/// for failures that prevent producing output at all.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    /// The config file could not be parsed or failed validation. The
    /// message names the offending field or carries the parser's
    /// line/column diagnostics.
    #[error("config error: {0}")]
    Config(String),

    /// A computation outside the per-cell pipeline failed (for example a
    /// perturbation draw that cannot satisfy the metric constraint).
    #[error("computation error at stage `{stage}`: {message}")]
    Compute { stage: String, message: String },

    /// Reading or writing an artifact failed.
    #[error("io error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// The machine-readable error record printed to stderr on failure.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub error: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<String>,
    pub message: String,
    pub exit_code: i32,
}

impl LabError {
    /// The process exit code this error maps to.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => EXIT_CONFIG,
            LabError::Compute { .. } => EXIT_COMPUTE,
            LabError::Io { .. } => EXIT_IO,
        }
    }

    /// The JSON error record for stderr.
    pub fn record(&self) -> ErrorRecord {
        match self {
            LabError::Config(msg) => ErrorRecord {
                error: "config",
                stage: None,
                message: msg.clone(),
                exit_code: EXIT_CONFIG,
            },
            LabError::Compute { stage, message } => ErrorRecord {
                error: "compute",
                stage: Some(stage.clone()),
                message: message.clone(),
                exit_code: EXIT_COMPUTE,
            },
            LabError::Io { path, source } => ErrorRecord {
                error: "io",
                stage: None,
                message: format!("{path}: {source}"),
                exit_code: EXIT_IO,
            },
        }
    }

    /// Wrap an I/O failure with the path it happened on.
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Result alias for harness operations.
pub type LabResult<T> = std::result::Result<T, LabError>;
