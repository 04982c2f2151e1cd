//! Mode-coupling closure for the structure function and the fit of the
//! logarithmic correction exponent.

pub mod closure;
pub mod error;
pub mod fit;

pub use closure::{angular_kernel, evolve_s, MctConfig, MctGrid, MemoryKernel, Normalization};
pub use error::{MctError, Result};
pub use fit::{consistency_residual, fit_delta, FitReport, FitWindow};
