use thiserror::Error;

/// Errors raised by the engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("certification required: {0}")]
    CertificationRequired(String),
    #[error("certification failed at eps = {eps:e}: observed {observed:e} exceeds bound {bound:e}")]
    CertificationFailed { eps: f64, observed: f64, bound: f64 },
    #[error("sampler returned a non-finite value at eps = {eps:e}")]
    SamplerFailure { eps: f64 },
    #[error("base point mismatch: {left} vs {right}")]
    BasePointMismatch { left: f64, right: f64 },
    #[error("division domain error: {0}")]
    DivisionDomain(String),
    #[error("working radius collapsed: {0}")]
    RadiusCollapse(String),
    #[error("not invertible to first order (zero slope at {at})")]
    NotInvertible { at: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("tolerance {tol:e} unreachable within panel cap (best width {width:e})")]
    ToleranceUnreachable { tol: f64, width: f64 },
    #[error("no convergence after {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("denominator vanishes at sample eps = {eps:e}")]
    VanishingDenominator { eps: f64 },
    #[error("syntax error at offset {offset}: expected {}", expected.join(" or "))]
    Syntax { offset: usize, expected: Vec<String> },
}

pub type Result<T> = std::result::Result<T, Error>;
