use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dataset has no records and no bins")]
    EmptyDataset,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("bin ({lo}, {hi}] for arm {arm} straddles boundary {boundary}")]
    BoundaryMismatch { lo: f64, hi: f64, arm: String, boundary: f64 },

    #[error("value {value} outside range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    #[error("numerical underflow: {0}")]
    Underflow(String),

    #[error("probability 1 has infinite odds")]
    InfiniteOdds,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("configuration error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("unstable resampling: {skipped} of {total} replicates failed")]
    Instability { skipped: usize, total: usize },

    #[error("identification failed: {0}")]
    Identification(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config { field: field.to_string(), message: message.into() }
    }
}
