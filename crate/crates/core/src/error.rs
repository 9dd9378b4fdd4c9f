use thiserror::Error;

/// Errors for sequence ingestion, kernel evaluation, and embedding extraction.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{path}: {msg}")]
    Format { path: String, msg: String },

    #[error("unknown symbol '{symbol}' in record '{id}' at position {position}")]
    UnknownSymbol {
        id: String,
        symbol: char,
        position: usize,
    },

    #[error("duplicate id '{0}'")]
    DuplicateId(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("enumeration cap exceeded: |alphabet|^k = {size} > {cap}")]
    EnumerationCap { size: u128, cap: u128 },

    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    /// Groups errors into the categories the CLI maps to exit codes:
    /// i/o (2), validation (3), numeric (4).
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Io(_) => ErrorCategory::Io,
            Error::Numeric(_) => ErrorCategory::Numeric,
            _ => ErrorCategory::Validation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Io,
    Validation,
    Numeric,
}

pub type Result<T> = std::result::Result<T, Error>;
