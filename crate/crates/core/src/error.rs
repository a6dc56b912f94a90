use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of range or inconsistent.
    #[error("invalid configuration at `{path}`: {reason}")]
    InvalidConfig { path: String, reason: String },

    /// The configuration document is not well-formed JSON.
    #[error("malformed configuration document: {0}")]
    MalformedConfig(String),

    /// An operation was called with inputs its contract forbids.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// The enumerated MDP would exceed the configured size limit.
    #[error("state space of {states} states exceeds the limit of {limit}; reduce battery_capacity or aoi_cap")]
    StateSpaceTooLarge { states: usize, limit: usize },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
