use thiserror::Error;

/// Errors raised by the estimators, problems and special functions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum VlmcError {
    /// A caller supplied an argument outside the documented range.
    #[error("usage error: {0}")]
    Usage(String),
    /// The problem or weight lacks a closed form the operation needs.
    #[error("capability error: {0}")]
    Capability(String),
    /// An argument lies outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    /// An iterative numerical routine did not reach its tolerance.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// A sampler could not make progress.
    #[error("runtime error: {0}")]
    Runtime(String),
    /// A sampled likelihood value has zero cumulative weight.
    #[error("unreachable sample: cumulative weight is zero at log-likelihood {log_likelihood}")]
    UnreachableSample { log_likelihood: f64 },
}

pub type Result<T> = std::result::Result<T, VlmcError>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(VlmcError::Usage(msg.into()))
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(VlmcError::Domain(msg.into()))
}

pub(crate) fn capability<T>(msg: impl Into<String>) -> Result<T> {
    Err(VlmcError::Capability(msg.into()))
}
