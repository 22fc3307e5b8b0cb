use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The problem instance or solver configuration violates a precondition.
    #[error("configuration error: {0}")]
    Config(String),

    /// A bifunction offers neither a closed-form prox nor a subgradient.
    #[error("capability error: {0}")]
    Capability(String),

    /// The projection target `C ∩ cuts` was detected to be empty.
    #[error("infeasible intersection: {0}")]
    Infeasible(String),

    /// An oracle returned a non-finite value or a point of the wrong dimension.
    #[error("oracle failure: {0}")]
    Oracle(String),

    /// One or more items of a parallel map failed.
    #[error("{} of {total} items failed (first indices {:?}): {first}", failed.len(), &failed[..failed.len().min(8)])]
    Parallel {
        failed: Vec<usize>,
        total: usize,
        first: Box<Error>,
    },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn oracle(msg: impl Into<String>) -> Self {
        Error::Oracle(msg.into())
    }

    /// Unwraps a parallel aggregate to the error of its first failing item.
    pub fn root(&self) -> &Error {
        match self {
            Error::Parallel { first, .. } => first.root(),
            other => other,
        }
    }
}
