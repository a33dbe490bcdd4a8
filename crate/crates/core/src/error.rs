use thiserror::Error;

/// Errors raised by the library.
///
/// The variants are grouped so a front end can map them onto a small set of
/// exit statuses: shape/domain/precondition problems are caller errors,
/// `Singular` and `NoConvergence` are numeric failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is singular to tolerance (pivot {pivot:.3e}, threshold {threshold:.3e})")]
    Singular { pivot: f64, threshold: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("index {index} out of range (k = {k})")]
    IndexOutOfRange { index: usize, k: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("pole at {re:+.6e}{im:+.6e}i lies in the closed domain")]
    PoleInDomain { re: f64, im: f64 },

    #[error("pole at {re:+.6e}{im:+.6e}i is within tolerance of a component boundary")]
    AmbiguousPole { re: f64, im: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures of the numeric kernels (singularity, non-convergence).
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Singular { .. } | Error::NoConvergence { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
