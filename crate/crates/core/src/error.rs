use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// CSV or config content that does not match the expected schema.
    /// `row` is 1-based and counts the header as row 1; `column` is 1-based.
    #[error("{file}: parse error at row {row}{}: {message}", column.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        file: String,
        row: usize,
        column: Option<usize>,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("RSS {value} dBm at slot {slot} is below the representation minimum {min_rss} dBm")]
    RssOutOfRange { slot: usize, value: f64, min_rss: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("cannot normalize {metric}: baseline value {value} is not positive")]
    Normalization { metric: String, value: f64 },

    #[error("value must be positive, got {0}")]
    NonPositive(f64),

    #[error("missing metric `{0}`")]
    MissingMetric(String),

    #[error("unknown baseline method `{0}`")]
    UnknownBaseline(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("evaluation of method `{method}` on dataset `{dataset}` (trial {trial}) failed: {source}")]
    Evaluation {
        method: String,
        dataset: String,
        trial: u32,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(
        file: impl Into<String>,
        row: usize,
        column: Option<usize>,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            file: file.into(),
            row,
            column,
            message: message.into(),
        }
    }
}
