use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure category, used by the command-line front end to pick an
/// exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad or inconsistent input data.
    Data,
    /// A numeric routine could not produce a usable result.
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed manifest: {0}")]
    Manifest(String),
    #[error("duplicate video id {0}")]
    DuplicateVideo(String),
    #[error("duplicate thread id {0}")]
    DuplicateThread(String),
    #[error("unknown thread {0}")]
    UnknownThread(String),
    #[error("unknown video {0}")]
    UnknownVideo(String),
    #[error("thread {0} has no head")]
    NoHead(String),
    #[error("thread {0} has multiple heads")]
    MultipleHeads(String),
    #[error("video {video}: {reason}")]
    BadLabel { video: String, reason: String },

    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static str },
    #[error("unsupported format version {0}")]
    BadVersion(u32),
    #[error("unknown feature kind code {0}")]
    BadFeatureKind(u32),
    #[error("truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("trailing bytes after payload: {0}")]
    TrailingBytes(usize),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("dimension must be positive")]
    ZeroDim,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("feature kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },
    #[error("insufficient pool: {available} descriptors for a codebook of size {requested}")]
    InsufficientPool { available: usize, requested: usize },
    #[error("codebook size must be positive")]
    ZeroCodebookSize,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("matrix has no non-zero singular values")]
    ZeroMatrix,
    #[error("singular value decomposition did not converge after {0} sweeps")]
    SvdNoConvergence(usize),

    #[error("missing head vector for thread {0}")]
    MissingHead(String),
    #[error("missing vector for video {0}")]
    MissingVector(String),
    #[error("missing {kind} descriptors for video {video}")]
    MissingDescriptors { video: String, kind: String },

    #[error("training set needs both classes")]
    SingleClass,
    #[error("alpha {index} = {value} outside [0, {c}]")]
    BoxViolation { index: usize, value: f64, c: f64 },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("class {label} has {count} members, fewer than {folds} folds")]
    InfeasibleFolds { label: String, count: usize, folds: usize },
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("csv: {0}")]
    Csv(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::ZeroMatrix | Error::SvdNoConvergence(_) => ErrorClass::Numeric,
            _ => ErrorClass::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
