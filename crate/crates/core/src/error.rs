use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("capacity exceeded: {what} is {got}, limit is {limit}")]
    Capacity {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    /// An algorithm invariant failed at run time. This always indicates a bug
    /// (or a non-submodular input fed to code that assumes submodularity).
    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("adversarial trace diverged at iteration {iteration}: {reason}")]
    AdversarialTrace { iteration: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
