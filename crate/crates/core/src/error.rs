use thiserror::Error;

/// Errors reported by network loading, encoding, and analysis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: gene {gene} has state {state}, but states must be below p = {p}")]
    InvalidConfiguration { gene: usize, state: u64, p: u64 },

    #[error("invalid configuration: expected {expected} gene states, got {got}")]
    WrongLength { expected: usize, got: usize },

    #[error("encoded value {value} out of range: must be below p^N = {limit}")]
    ValueOutOfRange { value: u64, limit: u64 },

    #[error("common prefix of an empty set is undefined")]
    EmptyInput,

    #[error("p-adic precision exhausted: all {precision} tracked digits cancelled in {operation}")]
    PrecisionExhausted { operation: &'static str, precision: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("network too large: p^N = {p}^{n} does not fit in 63 bits")]
    NetworkTooLarge { p: u64, n: usize },

    #[error("dataset '{name}' is not available: {hint}")]
    DatasetMissing { name: String, hint: String },

    #[error("state {0} is not a fixed point")]
    NotFixedPoint(u64),

    #[error("invalid ordering: {0}")]
    InvalidOrdering(String),

    #[error("exhaustive search refused for N = {n}: cap is {cap} (use branch-and-bound or a budget)")]
    ExhaustiveCap { n: usize, cap: usize },

    #[error("invalid search configuration: {0}")]
    InvalidSearchConfig(String),

    #[error("affine mapping property violated at ball ({level}, {index}): {detail}")]
    MappingViolation {
        level: usize,
        index: u64,
        detail: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
