use thiserror::Error;

/// Errors raised by the analysis library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("{name} is not symmetric positive semi-definite: {detail}")]
    NotPsd { name: String, detail: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown id `{0}`")]
    UnknownId(String),

    #[error("self-loop on `{0}`")]
    SelfLoop(String),

    #[error("spatial unit `{0}` has no neighbours (island)")]
    Island(String),

    #[error("zero variance: {0}")]
    ZeroVariance(String),

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("{what} out of range: {value} not in [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("missing value at row {row}, column `{column}`")]
    MissingValue { row: usize, column: String },

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("fixture `{name}` failed its checksum (expected {expected}, got {actual})")]
    Checksum {
        name: String,
        expected: String,
        actual: String,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerical routines, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Numerical(_) | Error::RankDeficient(_) | Error::NotPsd { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
