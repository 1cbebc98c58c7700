use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is singular (pivot {pivot:e} below threshold {threshold:e})")]
    SingularMatrix { pivot: f64, threshold: f64 },
    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid gallery spec: {0}")]
    InvalidSpec(String),
    #[error("starting matrix does not commute with A (relative commutator {0:e})")]
    NonCommutingStart(f64),
    #[error("iteration trace is empty")]
    EmptyTrace,
}

pub type Result<T> = std::result::Result<T, Error>;
