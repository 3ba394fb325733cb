use std::path::PathBuf;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const DEGENERATE: i32 = 2;
    pub const CONFIG: i32 = 3;
    pub const EMPTY_AFTER_CROP: i32 = 4;
    pub const BATCH_FAILURES: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] skinseg::Error),

    #[error("{0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("mesh {0} is empty after cropping")]
    EmptyAfterCrop(String),

    #[error("{failed} of {total} subjects failed")]
    BatchFailures { failed: usize, total: usize },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use skinseg::Error as E;
        match self {
            CliError::Core(e) => match e {
                E::Io { .. }
                | E::UnsupportedDatatype(_)
                | E::InvalidHeader(_)
                | E::SizeMismatch { .. }
                | E::NonFinite { .. }
                | E::Parse { .. } => exit::IO,
                E::DegenerateRange(_) | E::NoBackgroundSeed | E::SeedNotBackground { .. } => {
                    exit::DEGENERATE
                }
                E::OutOfRange(_) | E::InvalidArgument(_) | E::InvalidPhantom(_) => exit::CONFIG,
                E::EmptyPointSet => exit::EMPTY_AFTER_CROP,
            },
            CliError::Config(_) => exit::CONFIG,
            CliError::Io { .. } => exit::IO,
            CliError::EmptyAfterCrop(_) => exit::EMPTY_AFTER_CROP,
            CliError::BatchFailures { .. } => exit::BATCH_FAILURES,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
