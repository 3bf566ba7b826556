use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McgError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{what} did not converge within {iterations} iterations")]
    Convergence { what: &'static str, iterations: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("divergent integral: {0}")]
    Divergent(String),
    #[error("invalid model specification: {0}")]
    Model(String),
    #[error("invalid dataset: {0}")]
    Data(String),
    #[error("optimizer failure: {0}")]
    Optimizer(String),
}

pub type Result<T> = std::result::Result<T, McgError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(McgError::Domain(msg.into()))
}
