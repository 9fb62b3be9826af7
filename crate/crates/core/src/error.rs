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

    /// A malformed CSV cell or line. `line` and `column` are 1-based.
    #[error("{}line {line}, column {column}: {message}", origin_prefix(.origin))]
    Csv {
        origin: Option<PathBuf>,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{}line {line}: expected {expected} fields, found {found}", origin_prefix(.origin))]
    Arity {
        origin: Option<PathBuf>,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("{}{message}", origin_prefix(.origin))]
    Header {
        origin: Option<PathBuf>,
        message: String,
    },

    #[error("{}no data rows after the header", origin_prefix(.origin))]
    EmptyBody { origin: Option<PathBuf> },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("column `{0}` is constant (max == min) and cannot be normalized")]
    DegenerateColumn(String),

    #[error("invalid output range ({lo}, {hi}): lo must be below hi")]
    InvalidOutputRange { lo: f64, hi: f64 },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected} values, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(
        "feature `{feature}` = {value} lies outside the extrapolation guard band [{lo}, {hi}]"
    )]
    Extrapolation {
        feature: String,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("non-finite value encountered during training at epoch {epoch}, sample {sample}")]
    NumericFailure { epoch: usize, sample: usize },

    #[error("non-finite prediction {0}")]
    NonFinitePrediction(f64),

    #[error("candidate count overflows 64 bits")]
    CandidateOverflow,

    #[error("malformed model file: {0}")]
    ModelFormat(String),

    #[error("malformed screening config: {0}")]
    ScreenConfig(String),
}

fn origin_prefix(origin: &Option<PathBuf>) -> String {
    match origin {
        Some(p) => format!("{}: ", p.display()),
        None => String::new(),
    }
}

impl Error {
    /// True for failures of the numerics rather than of the user's input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NumericFailure { .. } | Error::NonFinitePrediction(_)
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach a file path to a parse error produced from in-memory text.
    pub(crate) fn with_origin(self, path: &std::path::Path) -> Self {
        let p = Some(path.to_path_buf());
        match self {
            Error::Csv {
                line,
                column,
                message,
                ..
            } => Error::Csv {
                origin: p,
                line,
                column,
                message,
            },
            Error::Arity {
                line,
                expected,
                found,
                ..
            } => Error::Arity {
                origin: p,
                line,
                expected,
                found,
            },
            Error::Header { message, .. } => Error::Header { origin: p, message },
            Error::EmptyBody { .. } => Error::EmptyBody { origin: p },
            other => other,
        }
    }
}
