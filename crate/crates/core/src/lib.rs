//! Fourier-space toolkit for the cut-off anisotropic KPZ / stochastic Burgers
//! equation on the two-dimensional torus: mode lattice and interaction kernel,
//! white-noise sampling, an exponential Euler-Maruyama integrator with direct
//! and FFT nonlinearity backends, and Monte Carlo estimators for the
//! diffusivity and variance observables.

pub mod error;
pub mod field;
pub mod io;
pub mod kernel;
pub mod laplace;
pub mod lattice;
pub mod noise;
pub mod nonlinearity;
pub mod numerics;
pub mod observables;
pub mod quad;
pub mod sim;
pub mod stats;
pub mod test_function;

pub use error::{Error, Result};
pub use field::SpectralField;
pub use kernel::kernel;
pub use lattice::{Mode, ModeLattice};
pub use nonlinearity::{nonlinearity, Backend, Nonlinearity};
pub use sim::{simulate, step, SimConfig, Trajectory};
pub use stats::{Estimate, SeriesEstimate};
pub use test_function::{Profile, TestFunction};
