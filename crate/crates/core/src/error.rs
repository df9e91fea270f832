use thiserror::Error;

pub type Result<T> = std::result::Result<T, QaoaError>;

#[derive(Debug, Error)]
pub enum QaoaError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{n} qubits exceeds the supported maximum of {max}")]
    Capacity { n: usize, max: usize },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl QaoaError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        QaoaError::InvalidArgument(msg.into())
    }
}
