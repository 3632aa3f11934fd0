use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("coverage error: {0}")]
    Coverage(String),
    #[error("branch error: {0}")]
    Branch(String),
    #[error("sampling error: {0}")]
    Sampling(String),
    #[error("no sign change: {0}")]
    NoBracket(String),
    #[error("did not converge: {0}")]
    Convergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        domain(format!("{what} must be finite, got {x}"))
    }
}
