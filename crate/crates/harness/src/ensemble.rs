//! Deterministic parallel ensembles.

use std::sync::Arc;

use akpz_core::noise::trajectory_seed;
use akpz_core::sim::simulate_on;
use akpz_core::{ModeLattice, SimConfig, TestFunction, Trajectory};
use rayon::prelude::*;

use crate::error::{HarnessError, Result};

/// Per-trajectory seeds derived from the master seed.
pub fn seeds(master: u64, n: u64) -> Vec<u64> {
    (0..n).map(|i| trajectory_seed(master, i)).collect()
}

pub(crate) fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        b = b.num_threads(j);
    }
    b.build().map_err(|e| HarnessError::Pool(e.to_string()))
}

/// Runs `n` trajectories of `cfg` and maps each through `f` in index order.
///
/// Trajectory `i` is simulated with seed `trajectory_seed(master, i)`, so the
/// result does not depend on `jobs`. The first failing index aborts the run.
pub fn run_ensemble<T, F>(
    cfg: &SimConfig,
    phis: &[TestFunction],
    master: u64,
    n: u64,
    jobs: Option<usize>,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Trajectory) -> Result<T> + Sync,
{
    let lattice: Arc<ModeLattice> = match phis.first() {
        Some(p) => p.lattice().clone(),
        None => Arc::new(ModeLattice::new(cfg.cutoff_n)?),
    };
    let run = |i: u64| -> Result<T> {
        let mut c = cfg.clone();
        c.seed = trajectory_seed(master, i);
        let tr = simulate_on(&c, &lattice, phis)
            .map_err(|source| HarnessError::Trajectory { index: i, seed: c.seed, source })?;
        f(tr)
    };
    let results: Vec<Result<T>> = pool(jobs)?.install(|| (0..n).into_par_iter().map(run).collect());
    results.into_iter().collect()
}

/// Keeps whole trajectories.
pub fn simulate_ensemble(
    cfg: &SimConfig,
    phis: &[TestFunction],
    master: u64,
    n: u64,
    jobs: Option<usize>,
) -> Result<Vec<Trajectory>> {
    run_ensemble(cfg, phis, master, n, jobs, Ok)
}
