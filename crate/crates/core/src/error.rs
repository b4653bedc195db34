//! Error type shared by every stage of the pipeline.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse failure class. Maps one-to-one onto CLI exit codes and FFI
/// status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Caller supplied an invalid argument or configuration.
    Usage,
    /// Input data failed to parse or validate.
    Data,
    /// The numerical problem is ill-posed (rank deficiency).
    Numerical,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage => 1,
            ErrorKind::Data => 2,
            ErrorKind::Numerical => 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    InvalidTrace(String),

    #[error("no metric sample could be paired with a power sample ({metrics} metric samples, {dropped} dropped)")]
    EmptyAlignment { metrics: usize, dropped: usize },

    #[error("insufficient rows: {rows} rows, at least {required} required")]
    InsufficientRows { rows: usize, required: usize },

    #[error("design matrix is rank deficient: column `{column}` is constant or a linear combination of earlier columns")]
    RankDeficient { column: &'static str },

    #[error("model schema error: {0}")]
    Schema(String),

    #[error("model invariant violated: {0}")]
    ModelInvariant(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::RankDeficient { .. } => ErrorKind::Numerical,
            Error::InvalidArgument(_) => ErrorKind::Usage,
            Error::Parse { .. }
            | Error::InvalidTrace(_)
            | Error::EmptyAlignment { .. }
            | Error::InsufficientRows { .. }
            | Error::Schema(_)
            | Error::ModelInvariant(_)
            | Error::Io(_) => ErrorKind::Data,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
