use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integrator did not converge: {0}")]
    Integrator(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("symmetry violation: {0}")]
    Symmetry(String),

    #[error("inconsistent Ising mapping: {0}")]
    Mapping(String),

    #[error("outside the domain: {0}")]
    Domain(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
