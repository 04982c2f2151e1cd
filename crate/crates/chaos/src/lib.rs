//! Chaos-expansion realization of the cut-off generator.

pub mod basis;
pub mod calibration;
pub mod error;
pub mod hierarchy;
pub mod inequalities;
pub mod multipliers;
pub mod operator;
pub mod schur;
pub mod vector;

pub use basis::ChaosBasis;
pub use error::{ChaosError, Result};
pub use hierarchy::{Hierarchy, Sandwich};
pub use multipliers::MultiplierParams;
pub use operator::SparseOperator;
pub use vector::{ChaosVector, FockSpace};
