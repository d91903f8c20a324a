use alloc::string::String;

/// Errors raised by model construction, simulation and estimation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("state dimension {found} does not match the {expected} species of the network")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid channel map: {0}")]
    InvalidChannelMap(String),

    #[error("path budget exceeded: more than {limit} updates on a single path")]
    PathBudgetExceeded { limit: u64 },

    #[error("sample budget exceeded: level '{level}' needs more than {limit} samples")]
    SampleBudgetExceeded { level: String, limit: u64 },

    #[error("scaling undefined: {0}")]
    ScalingUndefined(&'static str),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn invalid_argument(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
