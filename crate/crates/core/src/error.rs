use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("materialization needs {needed} entries, cap is {cap} (use the schedule/streaming path or raise KRONSYNTH_CAP)")]
    CapExceeded { needed: u128, cap: u64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("semiring mismatch: {0}")]
    Semiring(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("code provider found only {achieved} of {want} codewords for A({n},{distance},{weight})")]
    CodeShortfall { n: u32, distance: u32, weight: u32, want: usize, achieved: usize },

    #[error("memo table exceeded {0} states")]
    StateCap(usize),

    #[error("random construction failed after {0} attempts")]
    RetryLimit(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
