use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Q overflows at x = {x}")]
    Overflow { x: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("MRS number for x = {x} is out of range (largest supported x is about {max_x:.6e})")]
    MrsRange { x: f64, max_x: f64 },

    #[error("root finder did not converge: {0}")]
    RootFinding(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("non-finite integrand value at node {x}")]
    NonFinite { x: f64 },

    #[error("orthonormality residual {residual:.3e} exceeds tolerance at degree {degree}")]
    Orthonormality { degree: usize, residual: f64 },

    #[error("degree {requested} exceeds the supported maximum {max}")]
    DegreeTooLarge { requested: usize, max: usize },

    #[error("eigen decomposition failed: {0}")]
    Eigen(String),

    #[error("Christoffel numbers disagree: eigenvector route vs kernel route differ by {discrepancy:.3e}")]
    ChristoffelMismatch { discrepancy: f64 },

    #[error("tail integral did not decay by t = {radius}")]
    DivergentTail { radius: f64 },

    #[error("{solver} did not converge after {iterations} iterations (defect {defect:.3e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        defect: f64,
    },

    #[error("singular system in {0}")]
    Singular(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
