use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChaosError {
    #[error(transparent)]
    Core(#[from] akpz_core::Error),
    #[error("truncation level must be at least 2, got {0}")]
    Truncation(usize),
    #[error("mu must be positive, got {0}")]
    NonPositiveMu(f64),
    #[error("linear solve failed: relative residual {residual:.3e}")]
    Solver { residual: f64 },
    #[error("sandwich violated at n = {n}: {detail}")]
    SandwichViolation { n: usize, detail: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

pub type Result<T> = std::result::Result<T, ChaosError>;
