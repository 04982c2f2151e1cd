use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MctError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("wavenumber must be positive, got {0}")]
    NonPositiveWavenumber(f64),
    #[error("closure became non-finite at t = {t:.6e}, q = {q:.3e} (step {step})")]
    Instability { t: f64, q: f64, step: usize },
    #[error("fit needs at least {need} points in the window, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("fit residual has {minima} local minima over delta in [{lo}, {hi}]")]
    NonMonotoneResidual { minima: usize, lo: f64, hi: f64 },
    #[error("time grid spans {decades:.2} decades, need at least 4")]
    ShortGrid { decades: f64 },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for MctError {
    fn from(e: std::io::Error) -> Self {
        MctError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, MctError>;
