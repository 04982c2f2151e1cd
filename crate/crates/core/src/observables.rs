//! Estimators over simulated ensembles. All big-torus quantities are read off
//! unit-torus trajectories through `H_N(t)[.] = h(t/N^2)[.]` in law.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::kernel_unchecked;
use crate::laplace::{laplace_samples, LaplaceEstimate};
use crate::lattice::Mode;
use crate::sim::Trajectory;
use crate::stats::{batch_means, interp, Estimate, SeriesEstimate};
use crate::test_function::TestFunction;

/// `sum_{l+m=k} (K^N_{l,m})^2` over lattice pairs.
pub fn kernel_square_sum(phi_lattice: &crate::lattice::ModeLattice, k: Mode, cutoff_n: u32) -> f64 {
    phi_lattice
        .modes()
        .iter()
        .map(|&l| {
            let m = k - l;
            if m.is_zero() {
                0.0
            } else {
                kernel_unchecked(l, m, cutoff_n).powi(2)
            }
        })
        .sum()
}

/// `Var(lambda N[eta][phi]) = 2 lambda^2 sum_k |phi_hat(k)|^2 sum_{l+m=k} K_{l,m}^2`
/// for white noise `eta`, zero mode included.
pub fn wick_variance_nonlinearity(phi: &TestFunction, cutoff_n: u32, lambda: f64) -> f64 {
    let lat = phi.lattice();
    let mut acc = phi.zero * phi.zero * kernel_square_sum(lat, Mode::ZERO, cutoff_n);
    for (s, &k) in lat.modes().iter().enumerate() {
        let w = phi.coeffs[s].norm_sqr();
        if w > 0.0 {
            acc += w * kernel_square_sum(lat, k, cutoff_n);
        }
    }
    2.0 * lambda * lambda * acc
}

fn check_ensemble(ens: &[Trajectory]) -> Result<&Trajectory> {
    let first = ens.first().ok_or(Error::EmptyEnsemble)?;
    for tr in ens {
        if tr.times != first.times || tr.config.cutoff_n != first.config.cutoff_n {
            return Err(Error::Shape("trajectories differ in grid or cutoff".into()));
        }
    }
    Ok(first)
}

fn n2(tr: &Trajectory) -> f64 {
    let n = tr.config.cutoff_n as f64;
    n * n
}

/// Per-trajectory `1 + (N^2/t) B(t/N^2)^2` at big-torus times `t_grid`.
pub fn green_kubo_samples(ens: &[Trajectory], id: &str, t_grid: &[f64]) -> Result<Vec<Vec<f64>>> {
    let first = check_ensemble(ens)?;
    let n2 = n2(first);
    ens.iter()
        .map(|tr| {
            let b = tr.b_series(id)?;
            t_grid
                .iter()
                .map(|&t| {
                    if t == 0.0 {
                        return Ok(1.0);
                    }
                    let v = interp(&tr.times, b, t / n2)?;
                    Ok(1.0 + n2 / t * v * v)
                })
                .collect()
        })
        .collect()
}

/// `D_N(t) = 1 + (N^2/t) E[B_{e0}(t/N^2)^2]`.
pub fn green_kubo_d(ens: &[Trajectory], id: &str, t_grid: &[f64]) -> Result<SeriesEstimate> {
    SeriesEstimate::from_samples(t_grid.to_vec(), &green_kubo_samples(ens, id, t_grid)?)
}

fn uniform_spacing(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::Shape("need at least two recorded times".into()));
    }
    let h = times[1] - times[0];
    let n = times.len() - 1;
    if ((times[n] - times[0]) / n as f64 - h).abs() > 1e-9 * h {
        return Err(Error::Shape("direct estimator needs a uniform record grid".into()));
    }
    Ok(h)
}

/// Per-trajectory autocovariance `C(r_i) = mean_s X(s) X(s + r_i)` of the recorded
/// `X = lambda N[u][phi]`, averaged over all origins `s <= T - r_max`.
pub fn autocovariance_samples(ens: &[Trajectory], id: &str, max_lag: usize) -> Result<Vec<Vec<f64>>> {
    check_ensemble(ens)?;
    ens.iter()
        .map(|tr| {
            let x = &tr.probe(id)?.nonlin;
            if x.len() <= max_lag {
                return Err(Error::OutsideHorizon { t: max_lag as f64, horizon: x.len() as f64 });
            }
            let origins = x.len() - max_lag;
            Ok((0..=max_lag)
                .map(|i| (0..origins).map(|s| x[s] * x[s + i]).sum::<f64>() / origins as f64)
                .collect())
        })
        .collect()
}

/// Per-trajectory direct Green-Kubo estimate
/// `D(t) = 1 + (2 N^2 / t) int_0^tau int_0^s C(r) dr ds`, `tau = t/N^2`.
pub fn direct_green_kubo_samples(ens: &[Trajectory], id: &str, t_grid: &[f64]) -> Result<Vec<Vec<f64>>> {
    let first = check_ensemble(ens)?;
    let n2 = n2(first);
    let h = uniform_spacing(&first.times)?;
    let tau_max = t_grid.iter().cloned().fold(0.0, f64::max) / n2;
    let max_lag = (tau_max / h - 1e-9).ceil().max(1.0) as usize;
    let lags: Vec<f64> = (0..=max_lag).map(|i| i as f64 * h).collect();
    let cov = autocovariance_samples(ens, id, max_lag)?;
    cov.iter()
        .map(|c| {
            let mut inner = vec![0.0; c.len()];
            let mut outer = vec![0.0; c.len()];
            for i in 1..c.len() {
                inner[i] = inner[i - 1] + 0.5 * h * (c[i - 1] + c[i]);
                outer[i] = outer[i - 1] + 0.5 * h * (inner[i - 1] + inner[i]);
            }
            t_grid
                .iter()
                .map(|&t| {
                    if t == 0.0 {
                        return Ok(1.0);
                    }
                    Ok(1.0 + 2.0 * n2 / t * interp(&lags, &outer, t / n2)?)
                })
                .collect()
        })
        .collect()
}

pub fn direct_green_kubo(ens: &[Trajectory], id: &str, t_grid: &[f64]) -> Result<SeriesEstimate> {
    SeriesEstimate::from_samples(t_grid.to_vec(), &direct_green_kubo_samples(ens, id, t_grid)?)
}

/// `E[X(s0) X(s0 + r)]` from a single time origin `s0` (recorded index), for
/// lags `0..=max_lag`; comparing two origins tests stationarity.
pub fn autocovariance_from_origin(ens: &[Trajectory], id: &str, origin: usize, max_lag: usize) -> Result<SeriesEstimate> {
    let first = check_ensemble(ens)?;
    if origin + max_lag >= first.times.len() {
        return Err(Error::OutsideHorizon { t: first.times.len() as f64, horizon: (origin + max_lag) as f64 });
    }
    let lags: Vec<f64> = (0..=max_lag).map(|i| first.times[origin + i] - first.times[origin]).collect();
    let samples = ens
        .iter()
        .map(|tr| {
            let x = &tr.probe(id)?.nonlin;
            Ok((0..=max_lag).map(|i| x[origin] * x[origin + i]).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    SeriesEstimate::from_samples(lags, &samples)
}

/// `mu int e^{-mu t} t D(t) dt` from per-trajectory `D` paths on `t_grid` (starting at 0).
pub fn laplace_d(t_grid: &[f64], d_samples: &[Vec<f64>], mu: f64, tol: f64) -> Result<LaplaceEstimate> {
    let td: Vec<Vec<f64>> = d_samples
        .iter()
        .map(|d| d.iter().zip(t_grid).map(|(d, t)| d * t).collect())
        .collect();
    laplace_samples(t_grid, &td, mu, tol)
}

/// `B_phi(mu) = mu int e^{-mu t} E[B_phi(t)^2] dt` on the unit torus.
pub fn laplace_b_variance(ens: &[Trajectory], id: &str, mu: f64, tol: f64) -> Result<LaplaceEstimate> {
    let first = check_ensemble(ens)?;
    let samples = ens
        .iter()
        .map(|tr| Ok(tr.b_series(id)?.iter().map(|b| b * b).collect()))
        .collect::<Result<Vec<Vec<f64>>>>()?;
    laplace_samples(&first.times, &samples, mu, tol)
}

/// The resolvent value `(2/mu) <n_phi, (mu - L)^{-1} n_phi>` that `B_phi(mu)` must equal.
pub fn resolvent_target(mu: f64, form: f64) -> f64 {
    2.0 / mu * form
}

/// Unit-torus series `E[B_phi(t)^2]` on the recorded grid.
pub fn b_second_moment(ens: &[Trajectory], id: &str) -> Result<SeriesEstimate> {
    let first = check_ensemble(ens)?;
    let samples = ens
        .iter()
        .map(|tr| Ok(tr.b_series(id)?.iter().map(|b| b * b).collect()))
        .collect::<Result<Vec<Vec<f64>>>>()?;
    SeriesEstimate::from_samples(first.times.clone(), &samples)
}

/// Pathwise pieces of `h(t)[phi] - h(0)[phi] = A + B + C`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub times: Vec<f64>,
    pub increment: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub residual: Vec<f64>,
}

pub fn decompose_abc(tr: &Trajectory, id: &str) -> Result<Decomposition> {
    let p = tr.probe(id)?;
    if p.a.len() != p.h.len() || p.c.len() != p.h.len() {
        return Err(Error::Shape("trajectory was simulated without record_decomposition".into()));
    }
    let h0 = p.h[0];
    let increment: Vec<f64> = p.h.iter().map(|h| h - h0).collect();
    let residual = (0..p.h.len()).map(|i| increment[i] - p.a[i] - p.b[i] - p.c[i]).collect();
    Ok(Decomposition {
        times: tr.times.clone(),
        increment,
        a: p.a.clone(),
        b: p.b.clone(),
        c: p.c.clone(),
        residual,
    })
}

/// Diffusive rescaling: `V^{eps,N}_phi(t)` is read from the unit torus at
/// `tau = t / (eps N)^2` with the test function `phi^(eps N)`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceScaling {
    pub eps: f64,
    pub cutoff_n: u32,
}

impl VarianceScaling {
    /// The dilation factor `a = eps N` applied to the test function profile.
    pub fn profile_scale(&self) -> f64 {
        self.eps * self.cutoff_n as f64
    }

    pub fn unit_time(&self, t: f64) -> f64 {
        t / self.profile_scale().powi(2)
    }

    pub fn unit_mu(&self, mu: f64) -> f64 {
        mu * self.profile_scale().powi(2)
    }
}

fn increment_squares(ens: &[Trajectory], id: &str) -> Result<Vec<Vec<f64>>> {
    ens.iter()
        .map(|tr| {
            let h = &tr.probe(id)?.h;
            Ok(h.iter().map(|x| (x - h[0]).powi(2)).collect())
        })
        .collect()
}

/// `V(t) = E[(H(t)[phi] - H(0)[phi])^2]` at big-torus times `t_grid`; the
/// ensemble must carry the probe `id` built from `phi^(eps N)`.
pub fn variance_increment_v(ens: &[Trajectory], id: &str, scaling: VarianceScaling, t_grid: &[f64]) -> Result<SeriesEstimate> {
    let first = check_ensemble(ens)?;
    let sq = increment_squares(ens, id)?;
    let samples = sq
        .iter()
        .map(|v| t_grid.iter().map(|&t| interp(&first.times, v, scaling.unit_time(t))).collect())
        .collect::<Result<Vec<Vec<f64>>>>()?;
    SeriesEstimate::from_samples(t_grid.to_vec(), &samples)
}

/// `V(mu) = mu int e^{-mu t} V(t) dt`, evaluated as the unit-torus transform at `(eps N)^2 mu`.
pub fn laplace_v(ens: &[Trajectory], id: &str, scaling: VarianceScaling, mu: f64, tol: f64) -> Result<LaplaceEstimate> {
    let first = check_ensemble(ens)?;
    let mut e = laplace_samples(&first.times, &increment_squares(ens, id)?, scaling.unit_mu(mu), tol)?;
    e.mu = mu;
    Ok(e)
}

/// `lambda^2 t sum_{|k|<=N} |phi_hat(k)|^2 log(1 / max(|k/N|^2, N^-2))`, zero mode included.
pub fn dirichlet_rhs(phi: &TestFunction, cutoff_n: u32, lambda: f64, t: f64) -> f64 {
    let n2 = (cutoff_n as f64).powi(2);
    let lat = phi.lattice();
    let weight = |k2: f64| -(k2 / n2).max(1.0 / n2).ln();
    let mut acc = phi.zero * phi.zero * weight(0.0);
    for (s, k) in lat.modes().iter().enumerate() {
        if (k.norm2() as f64) <= n2 {
            acc += phi.coeffs[s].norm_sqr() * weight(k.norm2() as f64);
        }
    }
    lambda * lambda * t * acc
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirichletRow {
    pub t: f64,
    pub lhs: Estimate,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirichletReport {
    pub rows: Vec<DirichletRow>,
    pub bound: f64,
    pub max_ratio: f64,
    pub passed: bool,
}

/// Compares `E[B_phi(t)^2]` (Monte Carlo) with the Dirichlet-form bound.
pub fn dirichlet_bound_check(ens: &[Trajectory], phi: &TestFunction, lambda: f64, ts: &[f64], bound: f64) -> Result<DirichletReport> {
    let first = check_ensemble(ens)?;
    let n = first.config.cutoff_n;
    let mut rows = Vec::new();
    for &t in ts {
        let vals = ens
            .iter()
            .map(|tr| Ok(interp(&tr.times, tr.b_series(&phi.id)?, t)?.powi(2)))
            .collect::<Result<Vec<f64>>>()?;
        let lhs = batch_means(&vals)?;
        let rhs = dirichlet_rhs(phi, n, lambda, t);
        let ratio = if rhs > 0.0 { lhs.value / rhs } else { 0.0 };
        rows.push(DirichletRow { t, lhs, rhs, ratio });
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(DirichletReport { rows, bound, max_ratio, passed: max_ratio <= bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ModeLattice;
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn wick_closed_form_e0() {
        let lat = Arc::new(ModeLattice::new(1).unwrap());
        let e0 = TestFunction::e0(lat);
        // four unit modes, each K_{l,-l} = +-1/(2 pi)
        let expect = 2.0 * 4.0 / (4.0 * PI * PI);
        assert!((wick_variance_nonlinearity(&e0, 1, 1.0) - expect).abs() < 1e-15);
        assert_eq!(wick_variance_nonlinearity(&e0, 1, 0.0), 0.0);
    }

    #[test]
    fn dirichlet_rhs_e0() {
        let lat = Arc::new(ModeLattice::new(2).unwrap());
        let e0 = TestFunction::e0(lat);
        assert!((dirichlet_rhs(&e0, 2, 0.7, 3.0) - 0.49 * 3.0 * 4f64.ln()).abs() < 1e-14);
        assert_eq!(dirichlet_rhs(&e0, 2, 0.0, 3.0), 0.0);
    }

    #[test]
    fn scaling_maps() {
        let s = VarianceScaling { eps: 0.5, cutoff_n: 8 };
        assert_eq!(s.profile_scale(), 4.0);
        assert_eq!(s.unit_time(32.0), 2.0);
        assert_eq!(s.unit_mu(1.0), 16.0);
    }
}
