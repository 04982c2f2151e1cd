//! The experiments behind each subcommand, as plain functions over configs.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use akpz_chaos::hierarchy::{bounds_table, Hierarchy, Sandwich};
use akpz_chaos::schur::{schur_positivity_check, theorem_bound_probe, PositivityRow, ProbeReport};
use akpz_core::laplace::{laplace_samples, LaplaceEstimate, DEFAULT_TAIL_TOL};
use akpz_core::observables::{
    direct_green_kubo_samples, green_kubo_samples, laplace_d, wick_variance_nonlinearity, VarianceScaling,
};
use akpz_core::stats::{batch_means, interp, Estimate, SeriesEstimate};
use akpz_core::{Mode, ModeLattice, SimConfig, TestFunction};
use akpz_mct::{consistency_residual, evolve_s, fit_delta, FitReport, MctGrid};
use serde::Serialize;

use crate::config::{DiffusivityConfig, HierarchyConfig, Kind, MctSection, PhiSpec, RunConfig, VarianceConfig};
use crate::ensemble::{run_ensemble, seeds};
use crate::error::{HarnessError, Result};
use crate::manifest::{OutputDir, RunManifest};

/// Exponents at which the closure consistency residual is tabulated.
pub const CONSISTENCY_DELTAS: [f64; 5] = [0.3, 0.4, 0.5, 0.6, 0.7];

pub fn lattice(n: u32) -> Result<Arc<ModeLattice>> {
    Ok(Arc::new(ModeLattice::new(n)?))
}

pub fn build_phis(specs: &[PhiSpec], lat: &Arc<ModeLattice>) -> Result<Vec<TestFunction>> {
    specs.iter().map(|s| s.build(lat)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ModeRow {
    pub k: Mode,
    pub energy: Estimate,
}

/// Time-averaged `|u(k)|^2` per mode, one sample per trajectory.
pub fn stationarity_stats(sim: &SimConfig, master: u64, n: u64, jobs: Option<usize>) -> Result<Vec<ModeRow>> {
    let mut cfg = sim.clone();
    cfg.keep_snapshots = true;
    let per_traj = run_ensemble(&cfg, &[], master, n, jobs, |tr| {
        let m = tr.snapshots.len() as f64;
        let len = tr.snapshots.first().map_or(0, |f| f.coeffs.len());
        Ok((0..len).map(|s| tr.snapshots.iter().map(|f| f.coeffs[s].norm_sqr()).sum::<f64>() / m).collect::<Vec<_>>())
    })?;
    let lat = lattice(sim.cutoff_n)?;
    (0..lat.len())
        .map(|s| {
            let col: Vec<f64> = per_traj.iter().map(|v| v[s]).collect();
            Ok(ModeRow { k: lat.mode(s), energy: batch_means(&col)? })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct LaplaceRow {
    pub mu: f64,
    /// `mu int e^{-mu t} t D(t) dt` from the direct estimator.
    pub d: LaplaceEstimate,
    /// The unit-torus transform of `E[B^2]` at `mu N^2`.
    pub b: LaplaceEstimate,
    /// `1/mu + N^2 B(mu N^2)`.
    pub identity: f64,
    pub identity_err: f64,
    pub difference: f64,
    /// Sum of the two error bars.
    pub combined_err: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiffusivityResult {
    pub green_kubo: SeriesEstimate,
    pub direct: SeriesEstimate,
    pub laplace: Vec<LaplaceRow>,
}

impl DiffusivityResult {
    /// Largest `|GK - direct|` in units of the combined standard error.
    pub fn max_estimator_z(&self) -> f64 {
        (0..self.green_kubo.len())
            .map(|i| {
                let (a, b) = (self.green_kubo.at(i), self.direct.at(i));
                let se = a.stderr.hypot(b.stderr);
                if se > 0.0 {
                    (a.value - b.value).abs() / se
                } else if a.value == b.value {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }
}

struct DiffSample {
    gk: Vec<f64>,
    direct: Vec<f64>,
    direct_laplace: Vec<f64>,
    b2: Vec<f64>,
}

/// Green-Kubo and direct estimates of `D(t)` and both sides of the Laplace identity.
pub fn diffusivity_stats(
    sim: &SimConfig,
    phi: &TestFunction,
    d: &DiffusivityConfig,
    master: u64,
    n: u64,
    jobs: Option<usize>,
) -> Result<DiffusivityResult> {
    if !sim.n_steps().is_multiple_of(sim.record_stride as u64) {
        return Err(HarnessError::Config(
            "the direct estimator needs a uniform record grid: the step count must be a multiple of record_stride".into(),
        ));
    }
    let n2 = (sim.cutoff_n as f64).powi(2);
    let n_rec = (sim.n_steps() / sim.record_stride as u64) as usize + 1;
    let half = (n_rec - 1) / 2;
    let unit: Vec<f64> = (0..n_rec).map(|i| i as f64 * sim.dt * sim.record_stride as f64).collect();
    let big: Vec<f64> = unit[..=half].iter().map(|t| t * n2).collect();
    let id = phi.id.clone();
    let samples = run_ensemble(sim, std::slice::from_ref(phi), master, n, jobs, |tr| {
        let one = std::slice::from_ref(&tr);
        Ok(DiffSample {
            gk: green_kubo_samples(one, &id, &d.t_grid)?.remove(0),
            direct: direct_green_kubo_samples(one, &id, &d.t_grid)?.remove(0),
            direct_laplace: if d.mu.is_empty() {
                Vec::new()
            } else {
                direct_green_kubo_samples(one, &id, &big)?.remove(0)
            },
            b2: tr.b_series(&id)?.iter().map(|b| b * b).collect(),
        })
    })?;
    let gk: Vec<Vec<f64>> = samples.iter().map(|s| s.gk.clone()).collect();
    let direct: Vec<Vec<f64>> = samples.iter().map(|s| s.direct.clone()).collect();
    let dl: Vec<Vec<f64>> = samples.iter().map(|s| s.direct_laplace.clone()).collect();
    let b2: Vec<Vec<f64>> = samples.iter().map(|s| s.b2.clone()).collect();
    let laplace = d
        .mu
        .iter()
        .map(|&mu| {
            let dm = laplace_d(&big, &dl, mu, DEFAULT_TAIL_TOL)?;
            let bm = laplace_samples(&unit, &b2, mu * n2, DEFAULT_TAIL_TOL)?;
            let identity = 1.0 / mu + n2 * bm.value;
            let identity_err = n2 * bm.error;
            Ok(LaplaceRow {
                mu,
                d: dm,
                b: bm,
                identity,
                identity_err,
                difference: dm.value - identity,
                combined_err: dm.error + identity_err,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DiffusivityResult {
        green_kubo: SeriesEstimate::from_samples(d.t_grid.clone(), &gk)?,
        direct: SeriesEstimate::from_samples(d.t_grid.clone(), &direct)?,
        laplace,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct VarianceResult {
    pub v: SeriesEstimate,
    pub laplace: Vec<LaplaceEstimate>,
}

impl VarianceResult {
    /// `V(t) / max(log t, 1)` per grid point.
    pub fn log_normalized(&self) -> Vec<f64> {
        self.v.abscissae.iter().zip(&self.v.mean).map(|(t, v)| v / t.ln().max(1.0)).collect()
    }
}

pub fn variance_phi(sim: &SimConfig, v: &VarianceConfig) -> Result<(TestFunction, VarianceScaling)> {
    let scaling = VarianceScaling { eps: v.eps, cutoff_n: sim.cutoff_n };
    let phi = TestFunction::from_profile("phi", lattice(sim.cutoff_n)?, v.profile, scaling.profile_scale())?;
    Ok((phi, scaling))
}

/// `V(t)` on the big torus and its Laplace transform.
pub fn variance_stats(sim: &SimConfig, v: &VarianceConfig, master: u64, n: u64, jobs: Option<usize>) -> Result<VarianceResult> {
    let (phi, scaling) = variance_phi(sim, v)?;
    let runs = run_ensemble(sim, std::slice::from_ref(&phi), master, n, jobs, |tr| {
        let h = &tr.probe("phi")?.h;
        let sq: Vec<f64> = h.iter().map(|x| (x - h[0]).powi(2)).collect();
        Ok((tr.times, sq))
    })?;
    let times = &runs[0].0;
    let sq: Vec<Vec<f64>> = runs.iter().map(|r| r.1.clone()).collect();
    let at_grid = sq
        .iter()
        .map(|s| v.t_grid.iter().map(|&t| Ok(interp(times, s, scaling.unit_time(t))?)).collect())
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let laplace = v
        .mu
        .iter()
        .map(|&mu| {
            let mut e = laplace_samples(times, &sq, scaling.unit_mu(mu), DEFAULT_TAIL_TOL)?;
            e.mu = mu;
            Ok(e)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VarianceResult { v: SeriesEstimate::from_samples(v.t_grid.clone(), &at_grid)?, laplace })
}

#[derive(Clone, Debug, Serialize)]
pub struct HierarchyResult {
    pub n_phi_norm2: f64,
    pub wick_variance: f64,
    pub sandwiches: Vec<Sandwich>,
    pub positivity: Vec<PositivityRow>,
    pub probe: Vec<ProbeReport>,
}

pub fn hierarchy_stats(h: &HierarchyConfig, seed: u64) -> Result<HierarchyResult> {
    let lat = lattice(h.cutoff_n)?;
    let phi = h.phi.build(&lat)?;
    let n_max = h.n_list.iter().copied().max().unwrap_or(1);
    let hier = Hierarchy::new(&phi, h.lambda, n_max)?;
    let sandwiches = bounds_table(&hier, &h.mu, &h.n_list)?;
    let mut positivity = Vec::new();
    if h.positivity_k_max >= 3 {
        for &mu in &h.mu {
            positivity.extend(schur_positivity_check(&lat, h.lambda, mu, h.positivity_k_max)?);
        }
    }
    let mut probe = Vec::new();
    if let Some(p) = &h.probe {
        for &mu in &h.mu {
            probe.extend(theorem_bound_probe(&lat, &p.params(h), mu, &p.levels, p.n_test_vectors, seed)?);
        }
    }
    Ok(HierarchyResult {
        n_phi_norm2: hier.n_phi_norm2(),
        wick_variance: wick_variance_nonlinearity(&phi, h.cutoff_n, h.lambda),
        sandwiches,
        positivity,
        probe,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MctResult {
    #[serde(skip)]
    pub grid: MctGrid,
    pub fit: FitReport,
    /// `(delta, residual)` pairs.
    pub consistency: Vec<(f64, f64)>,
}

impl MctResult {
    /// The tabulated exponent with the smallest consistency residual.
    pub fn consistency_argmin(&self) -> f64 {
        self.consistency.iter().fold((f64::NAN, f64::INFINITY), |a, &(d, r)| if r < a.1 { (d, r) } else { a }).0
    }
}

pub fn mct_stats(m: &MctSection) -> Result<MctResult> {
    let grid = evolve_s(&m.closure)?;
    let fit = fit_delta(&grid, &m.window)?;
    let consistency = CONSISTENCY_DELTAS
        .iter()
        .map(|&d| Ok((d, consistency_residual(d, &grid, &m.window)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(MctResult { grid, fit, consistency })
}

fn sim_of(cfg: &RunConfig) -> Result<&SimConfig> {
    cfg.sim.as_ref().ok_or_else(|| HarnessError::Config("missing [sim] section".into()))
}

fn csv_table(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut s = format!("{header}\n");
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

/// Runs the experiment named by `cfg.kind` and writes its outputs into `out`.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<RunManifest> {
    cfg.validate()?;
    let start = Instant::now();
    let mut dir = OutputDir::create(out, cfg)?;
    let n = cfg.n_trajectories;
    match cfg.kind {
        Kind::Simulate => {
            let sim = sim_of(cfg)?;
            let rows = stationarity_stats(sim, cfg.seed, n, cfg.jobs)?;
            dir.csv(
                "stationarity.csv",
                &csv_table(
                    "k1,k2,mean,stderr,n_samples",
                    rows.iter().map(|r| {
                        format!("{},{},{:e},{:e},{}", r.k.0, r.k.1, r.energy.value, r.energy.stderr, r.energy.n_samples)
                    }),
                ),
            )?;
            let z = rows.iter().map(|r| (r.energy.value - 1.0).abs() / r.energy.stderr).fold(0.0, f64::max);
            dir.manifest.tolerance("stationarity_max_z", z, 5.0, z <= 5.0);
            dir.manifest.seeds = seeds(cfg.seed, n);
        }
        Kind::Diffusivity => {
            let sim = sim_of(cfg)?;
            let d = cfg.diffusivity.as_ref().expect("validated");
            let lat = lattice(sim.cutoff_n)?;
            let phi = cfg.phi.first().unwrap_or(&PhiSpec::E0).build(&lat)?;
            let r = diffusivity_stats(sim, &phi, d, cfg.seed, n, cfg.jobs)?;
            dir.csv("d_green_kubo.csv", &r.green_kubo.to_csv())?;
            dir.csv("d_direct.csv", &r.direct.to_csv())?;
            dir.csv(
                "d_laplace.csv",
                &csv_table(
                    "mu,d_laplace,d_err,identity,identity_err,difference,combined_err",
                    r.laplace.iter().map(|l| {
                        format!(
                            "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                            l.mu, l.d.value, l.d.error, l.identity, l.identity_err, l.difference, l.combined_err
                        )
                    }),
                ),
            )?;
            let z = r.max_estimator_z();
            dir.manifest.tolerance("green_kubo_vs_direct_z", z, 3.0, z <= 3.0);
            for l in &r.laplace {
                let ok = l.difference.abs() <= l.combined_err;
                dir.manifest.tolerance(format!("laplace_identity_mu_{}", l.mu), l.difference.abs(), l.combined_err, ok);
            }
            dir.manifest.calibration.insert("n_squared".into(), (sim.cutoff_n as f64).powi(2));
            dir.manifest
                .calibration
                .insert("wick_variance".into(), wick_variance_nonlinearity(&phi, sim.cutoff_n, sim.lambda));
            dir.manifest.seeds = seeds(cfg.seed, n);
        }
        Kind::Variance => {
            let sim = sim_of(cfg)?;
            let v = cfg.variance.as_ref().expect("validated");
            let r = variance_stats(sim, v, cfg.seed, n, cfg.jobs)?;
            let norm = r.log_normalized();
            dir.csv(
                "variance.csv",
                &csv_table(
                    "t,v,stderr,v_over_log,n_samples",
                    (0..r.v.len()).map(|i| {
                        format!("{:e},{:e},{:e},{:e},{}", r.v.abscissae[i], r.v.mean[i], r.v.stderr[i], norm[i], r.v.n_samples)
                    }),
                ),
            )?;
            dir.csv(
                "variance_laplace.csv",
                &csv_table("mu,value,error", r.laplace.iter().map(|l| format!("{:e},{:e},{:e}", l.mu, l.value, l.error))),
            )?;
            let (phi, _) = variance_phi(sim, v)?;
            dir.manifest.calibration.insert("phi_norm2".into(), phi.norm2());
            dir.manifest.seeds = seeds(cfg.seed, n);
        }
        Kind::Hierarchy => {
            let h = cfg.hierarchy.as_ref().expect("validated");
            let r = hierarchy_stats(h, cfg.seed)?;
            dir.csv("bounds.csv", &csv_table("mu,n,value,side", r.sandwiches.iter().flat_map(|s| s.csv_rows())))?;
            if !r.positivity.is_empty() {
                dir.json("positivity.json", &r.positivity)?;
            }
            if !r.probe.is_empty() {
                dir.json("probe.json", &r.probe)?;
            }
            dir.manifest.calibration.insert("n_phi_norm2".into(), r.n_phi_norm2);
            dir.manifest.calibration.insert("wick_variance".into(), r.wick_variance);
            for row in &r.positivity {
                dir.manifest.tolerance(
                    format!("positivity_h{}_mu_{}", row.k, row.mu),
                    row.min_eigenvalue,
                    -1e-10 * row.norm,
                    row.passed,
                );
            }
        }
        Kind::Mct => {
            let m = cfg.mct.as_ref().expect("validated");
            let r = mct_stats(m)?;
            let mut csv = Vec::new();
            r.grid.write_csv(&mut csv)?;
            dir.csv("mct_s.csv", std::str::from_utf8(&csv).expect("ascii"))?;
            dir.json("mct_fit.json", &r)?;
            let ok = (0.4..=0.6).contains(&r.fit.delta);
            dir.manifest.tolerance("mct_delta_offset", (r.fit.delta - 0.5).abs(), 0.1, ok);
        }
        Kind::Check => {
            let only = cfg.check.as_ref().map(|c| c.only.clone()).unwrap_or_default();
            let report = crate::acceptance::run_suite(&only, cfg.jobs, &out.join("work"))?;
            dir.json(crate::report::ACCEPTANCE_FILE, &report)?;
            for c in &report.criteria {
                dir.manifest.tolerance(format!("criterion_{}", c.id), c.measured, c.tolerance, c.passed);
            }
        }
    }
    dir.manifest.timings.insert("total".into(), start.elapsed().as_secs_f64());
    dir.finish()
}
