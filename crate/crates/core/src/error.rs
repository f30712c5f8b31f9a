use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("component index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index set is empty")]
    EmptyIndexSet,

    #[error("index {0} appears more than once in the index set")]
    DuplicateIndex(usize),

    #[error("invalid subset size {size} for population {n}")]
    InvalidSubsetSize { size: usize, n: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("trimming {dropped} of {n} rows would leave an empty problem")]
    TrimLeavesNoRows { dropped: usize, n: usize },

    #[error("{algorithm} diverged after {ifo_units} IFO units (non-finite iterate or objective); the step size is likely too large")]
    Diverged { algorithm: String, ifo_units: u64 },

    #[error("inner loop length reached the cap of {cap} steps (gamma = {gamma})")]
    InnerLoopCap { cap: u64, gamma: f64 },

    #[error("trace samples must have strictly increasing IFO units ({previous} then {next})")]
    TraceOrder { previous: u64, next: u64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
