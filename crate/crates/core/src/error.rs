use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid sieve context: {0}")]
    InvalidContext(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("unsupported (k,l) pair ({k},{l}); supply custom arcs instead")]
    UnsupportedPair { k: u32, l: u32 },

    #[error("resource limit exceeded for {what}: cap {cap}, required {required}")]
    Resource { what: &'static str, cap: u128, required: u128 },

    #[error("magnitude overflow: {0}")]
    Overflow(String),

    #[error("grid too coarse: need at least {needed} samples, got {got}")]
    Resolution { needed: usize, got: usize },

    #[error("prefactor mismatch: {0}")]
    PrefactorMismatch(String),

    #[error("point {0} lies on an arc endpoint")]
    Endpoint(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("internal inconsistency: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad user input (CLI exit code 2).
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::InvalidContext(_)
                | Error::Domain(_)
                | Error::UnsupportedPair { .. }
                | Error::InvalidParams(_)
                | Error::Endpoint(_)
                | Error::Io(_)
                | Error::Json(_)
                | Error::Resource { .. }
                | Error::Resolution { .. }
                | Error::Overflow(_)
                | Error::Fit(_)
        )
    }
}
