use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A requested index or order is beyond what binary64 can represent.
    #[error("range error: {0}")]
    Range(String),
    /// A sequence generator failed to produce the element at `index`.
    #[error("evaluation failed at index {index}: {reason}")]
    Evaluation { index: usize, reason: String },
    /// A caller-supplied object (modulus, witness, partition) broke its contract.
    #[error("contract violation: {0}")]
    Contract(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
