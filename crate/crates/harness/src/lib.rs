//! Configuration files, deterministic ensembles, run manifests and the
//! acceptance dashboard behind the `akpz` command line tool.

pub mod acceptance;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod report;

pub use acceptance::{AcceptanceReport, CriterionResult};
pub use config::{parse_config, Kind, RunConfig};
pub use ensemble::run_ensemble;
pub use error::{HarnessError, Result};
pub use manifest::RunManifest;
