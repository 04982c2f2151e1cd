use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("cutoff must be at least 1, got {0}")]
    ZeroCutoff(u32),
    #[error("kernel argument {0:?} is the zero mode")]
    ZeroMode((i32, i32)),
    #[error("projection cutoff {requested} exceeds lattice cutoff {lattice}")]
    ProjectionCutoff { requested: u32, lattice: u32 },
    #[error("fft grid of size {grid} is too small for cutoff {cutoff}; need at least {min}")]
    FftGridTooSmall { grid: usize, cutoff: u32, min: usize },
    #[error("field lives on a lattice of cutoff {field} but cutoff {requested} was requested")]
    LatticeMismatch { field: u32, requested: u32 },
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("non-finite state at step {step} (t = {time}) for seed {seed}")]
    BlowUp { step: u64, time: f64, seed: u64 },
    #[error("test function {id:?} has Fourier support radius {radius} which does not fit cutoff {cutoff}")]
    UnsupportedSupport { id: String, radius: f64, cutoff: u32 },
    #[error("test function {0:?} violates the reality constraint")]
    NotReal(String),
    #[error("unknown test function {0:?}")]
    UnknownProbe(String),
    #[error("time {t} lies outside the simulated horizon [0, {horizon}]")]
    OutsideHorizon { t: f64, horizon: f64 },
    #[error("laplace parameter must be positive, got {0}")]
    NonPositiveMu(f64),
    #[error("laplace tail {tail:.3e} exceeds tolerance {tol:.3e} (relative to value {value:.3e}); extend the horizon")]
    InsufficientHorizon { tail: f64, value: f64, tol: f64 },
    #[error("empty ensemble")]
    EmptyEnsemble,
    #[error("series length mismatch: {0}")]
    Shape(String),
    #[error("malformed trajectory file: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
