use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the operation's domain.
    #[error("{what} out of range: {detail}")]
    Range { what: &'static str, detail: String },

    /// A configuration parameter (precision, tolerance, grid spec) is invalid.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An iterative solver failed to converge.
    #[error("{solver} did not converge after {iterations} iterations (last iterate {last}, residual {residual:e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        last: f64,
        residual: f64,
    },

    /// A computation would exceed its workspace budget.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("I/O error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn range(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Range {
            what,
            detail: detail.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
