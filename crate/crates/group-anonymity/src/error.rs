//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("signal too short: length {len}, need at least {min}")]
    SignalTooShort { len: usize, min: usize },
    #[error("odd-length signals are unsupported for the order-1 filter (length {0})")]
    OddLengthUnsupported(usize),
    #[error("level {level} too deep for signal of length {len} with order-{order} filter")]
    LevelTooDeep {
        len: usize,
        level: usize,
        order: usize,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported Daubechies order {0} (supported: 1..=10)")]
    UnsupportedOrder(usize),
    #[error("unknown attribute {0:?}")]
    UnknownAttribute(String),
    #[error("parameter value {0:?} never occurs in the microfile")]
    UnknownParameterValue(String),
    #[error("zero denominator at index {0} with a nonzero numerator")]
    DivisorZero(usize),
    #[error("label mismatch at index {index}: {left:?} vs {right:?}")]
    LabelMismatch {
        index: usize,
        left: String,
        right: String,
    },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("permutation strategy requires at least one target index")]
    EmptyTargets,
    #[error("offset {requested} leaves negative elements (minimum value {min})")]
    OffsetTooSmall { requested: f64, min: f64 },
    #[error("cannot rescale a vector with non-positive sum ({0})")]
    NonPositiveSum(f64),
    #[error("no admissible adjustment keeps concentration {index} non-negative")]
    NegativeConcentration { index: usize },
    #[error("infeasible redistribution target: {0}")]
    InfeasibleTarget(String),
    #[error("negative target count at bucket {0:?}")]
    NegativeTarget(String),
    #[error("stale plan: record {record} attribute {attribute:?} no longer holds {expected:?}")]
    StalePlan {
        record: usize,
        attribute: String,
        expected: String,
    },
    #[error("malformed row at line {line}: expected {expected} fields, got {got}")]
    MalformedRow {
        line: u64,
        expected: usize,
        got: usize,
    },
    #[error("duplicate attribute {0:?} in header")]
    DuplicateAttribute(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    #[error("invalid group spec: {0}")]
    InvalidGroupSpec(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the CLI: 1 config, 2 data, 3 infeasible redistribution.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::UnsupportedOrder(_)
            | Error::InvalidGroupSpec(_)
            | Error::EmptyTargets => 1,
            Error::InfeasibleTarget(_) | Error::NegativeTarget(_) => 3,
            _ => 2,
        }
    }
}
