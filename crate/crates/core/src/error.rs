use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("series did not converge after {terms} terms (partial log-sum {partial})")]
    NonConvergence { terms: usize, partial: f64 },
    #[error("root not bracketed: {0}")]
    RootBracket(String),
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
