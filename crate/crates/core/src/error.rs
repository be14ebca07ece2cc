use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZdError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested problem exceeds the desk-scale size caps.
    #[error("resource limit: {0}")]
    Resource(String),

    /// An input file could not be parsed.
    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },
}

impl ZdError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        ZdError::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, ZdError>;
