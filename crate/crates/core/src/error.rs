use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid direction: {0}")]
    InvalidDirection(String),
    #[error("element index ({m}, {n}) out of range for a {rows}x{cols} surface")]
    IndexOutOfRange {
        m: usize,
        n: usize,
        rows: usize,
        cols: usize,
    },
    #[error("path set is empty")]
    EmptyPaths,
    #[error("noise power must be nonnegative, got {0}")]
    NegativeNoise(f64),
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("weight matrix is all zero")]
    AllZeroWeights,
    #[error("rolloff must lie in [0, 1], got {0}")]
    InvalidRolloff(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("profile line {line}: {message}")]
    ProfileParse { line: usize, message: String },
    #[error("profile contains no clusters")]
    EmptyProfile,
    #[error("guard region of {0} degrees covers the entire pattern grid")]
    GuardCoversGrid(f64),
    #[error("config parse error at line {line}, column {column}: {message}")]
    ConfigParse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
