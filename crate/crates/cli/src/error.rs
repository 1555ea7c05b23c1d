use std::io::ErrorKind;
use std::path::PathBuf;

use serde_json::json;

/// Usage or input validation problem.
pub const EXIT_USAGE: i32 = 2;
/// Failure while running a valid request.
pub const EXIT_RUNTIME: i32 = 1;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("input not found: {}", .0.display())]
    MissingPath(PathBuf),

    #[error(transparent)]
    Core(#[from] relfilter::Error),

    #[error("{context}: {message}")]
    Output { context: String, message: String },
}

impl CliError {
    pub fn output(context: impl Into<String>, err: impl std::fmt::Display) -> Self {
        CliError::Output {
            context: context.into(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        use relfilter::Error as E;
        match self {
            CliError::Usage(_) | CliError::MissingPath(_) => EXIT_USAGE,
            CliError::Core(e) => match e {
                E::Io { source, .. } if source.kind() == ErrorKind::NotFound => EXIT_USAGE,
                E::Parse { .. }
                | E::Validation(_)
                | E::Param(_)
                | E::Format(_)
                | E::Shape { .. } => EXIT_USAGE,
                _ => EXIT_RUNTIME,
            },
            CliError::Output { .. } => EXIT_RUNTIME,
        }
    }

    /// Machine-readable form written to stderr on failure.
    pub fn to_json(&self) -> serde_json::Value {
        let (kind, path) = match self {
            CliError::Usage(_) => ("usage", None),
            CliError::MissingPath(p) => ("missing_path", Some(p.display().to_string())),
            CliError::Core(e) => {
                let path = match e {
                    relfilter::Error::Io { path, .. } | relfilter::Error::Parse { path, .. } => {
                        Some(path.display().to_string())
                    }
                    _ => None,
                };
                (e.kind(), path)
            }
            CliError::Output { .. } => ("output", None),
        };
        let mut body = json!({
            "kind": kind,
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        if let Some(path) = path {
            body["path"] = json!(path);
        }
        json!({ "error": body })
    }
}
