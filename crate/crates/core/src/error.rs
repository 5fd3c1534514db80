use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("spline order {0} is not supported (0..=5)")]
    UnsupportedOrder(u32),

    #[error("{stage}: dimension mismatch, expected {expected}, got {got}")]
    DimensionMismatch {
        stage: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{stage}: grid of {rows}x{cols} is too small, need at least {min} along each axis")]
    GridTooSmall {
        stage: &'static str,
        rows: usize,
        cols: usize,
        min: usize,
    },

    #[error("correction filter transfer function vanishes (min |R| = {0:e})")]
    SingularCorrectionFilter(f64),

    #[error("length {0} is not a power of two")]
    NonPowerOfTwo(usize),

    #[error("measurement count {m} out of range for signal length {n}")]
    BadMeasurementCount { m: usize, n: usize },

    #[error("unknown filter bank `{0}`")]
    UnknownBank(String),

    #[error("{levels} decomposition levels is too deep for a {rows}x{cols} grid (filter length {filter_len})")]
    TooManyLevels {
        levels: usize,
        rows: usize,
        cols: usize,
        filter_len: usize,
    },

    #[error("wavelet vector of length {got} does not match the {rows}x{cols}/{levels}-level ladder (expected {expected})")]
    BadLadder {
        rows: usize,
        cols: usize,
        levels: usize,
        expected: usize,
        got: usize,
    },

    #[error("measurements contain non-finite values")]
    NonFiniteMeasurements,

    #[error("operator norm estimate is zero; nothing to reconstruct against")]
    ZeroOperator,

    #[error("invalid solver configuration: {0}")]
    BadSolverConfig(String),

    #[error("{0}")]
    Format(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
