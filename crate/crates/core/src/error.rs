use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("feature store format error: {0}")]
    Format(String),

    #[error("image decode error: {0}")]
    Decode(String),

    #[error("backend error ({model}): {message}")]
    Backend { model: String, message: String },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("degenerate training set: {0}")]
    DegenerateTraining(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("cannot build folds: {0}")]
    Stratification(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::Param(_) => "parameter",
            Error::Shape { .. } => "shape",
            Error::Format(_) => "format",
            Error::Decode(_) => "decode",
            Error::Backend { .. } => "backend",
            Error::EmptyDataset => "empty_dataset",
            Error::DegenerateTraining(_) => "degenerate_training",
            Error::Data(_) => "data",
            Error::UndefinedMetric(_) => "undefined_metric",
            Error::Stratification(_) => "stratification",
        }
    }
}
