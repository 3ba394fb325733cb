use std::path::{Path, PathBuf};

/// Errors produced by the segmentation pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported NIfTI datatype code {0}")]
    UnsupportedDatatype(i16),

    #[error("invalid header: {0}")]
    InvalidHeader(String),

    #[error("size mismatch: header expects {expected} samples, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("volume contains {count} non-finite intensities")]
    NonFinite { count: usize },

    #[error("degenerate intensity range (min == max == {0})")]
    DegenerateRange(f32),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no background seed: all four slice corners are >= isovalue")]
    NoBackgroundSeed,

    #[error("seed ({x}, {y}) has intensity {value} >= isovalue {isovalue}")]
    SeedNotBackground {
        x: usize,
        y: usize,
        value: f32,
        isovalue: f64,
    },

    #[error("empty point set")]
    EmptyPointSet,

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("invalid phantom: {0}")]
    InvalidPhantom(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
