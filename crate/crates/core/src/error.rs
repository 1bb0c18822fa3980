use thiserror::Error;

/// Errors produced by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A parameter cell lies outside the hypotheses of the result being checked.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("optimizer did not converge (best upper bound {best_upper})")]
    NonConvergence { best_upper: f64 },

    #[error("corpus parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
