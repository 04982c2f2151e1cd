//! Fit of `-log(S/S0)/q^2 - t/2 = c t (log t)^delta` and the matching check.

use serde::{Deserialize, Serialize};

use crate::closure::MctGrid;
use crate::error::{MctError, Result};

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitWindow {
    pub t_min: f64,
    pub t_max: f64,
    /// Wavenumbers up to this value are fitted separately and pooled.
    pub q_max: f64,
    pub delta_lo: f64,
    pub delta_hi: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self { t_min: 1e2, t_max: 1e6, q_max: 1e-4, delta_lo: 0.1, delta_hi: 0.9 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QFit {
    pub q: f64,
    pub delta: f64,
    pub c: f64,
    /// Mean squared log residual at the optimum.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub delta: f64,
    pub c: f64,
    /// Smallest and largest per-wavenumber exponent.
    pub delta_band: (f64, f64),
    pub residual: f64,
    pub window: FitWindow,
    pub n_times: usize,
    pub per_q: Vec<QFit>,
}

fn window_rows(grid: &MctGrid, w: &FitWindow) -> Vec<usize> {
    (0..grid.t.len()).filter(|&i| grid.t[i] >= w.t_min && grid.t[i] <= w.t_max && grid.t[i] > 1.0).collect()
}

/// Log-space least squares for fixed `delta`: returns `(c, mean squared residual)`.
fn fit_fixed(ts: &[f64], r: &[f64], delta: f64) -> (f64, f64) {
    let u: Vec<f64> = ts.iter().zip(r).map(|(&t, &x)| x.ln() - t.ln() - delta * t.ln().ln()).collect();
    let m = u.iter().sum::<f64>() / u.len() as f64;
    let res = u.iter().map(|x| (x - m).powi(2)).sum::<f64>() / u.len() as f64;
    (m.exp(), res)
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

fn golden<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Coarse scan over `[lo, hi]`, then golden-section refinement around the minimum.
fn minimize_delta(ts: &[f64], r: &[f64], lo: f64, hi: f64) -> Result<f64> {
    let n = 40;
    let step = (hi - lo) / n as f64;
    let vals: Vec<f64> = (0..=n).map(|i| fit_fixed(ts, r, lo + step * i as f64).1).collect();
    let minima = (0..=n)
        .filter(|&i| (i == 0 || vals[i] < vals[i - 1]) && (i == n || vals[i] <= vals[i + 1]))
        .count();
    if minima != 1 {
        return Err(MctError::NonMonotoneResidual { minima, lo, hi });
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    let a = lo + step * best.saturating_sub(1) as f64;
    let b = (lo + step * (best + 1) as f64).min(hi);
    Ok(golden(|d| fit_fixed(ts, r, d).1, a, b, 1e-7))
}

/// Fits the exponent separately at each wavenumber in the window and pools them.
pub fn fit_delta(grid: &MctGrid, window: &FitWindow) -> Result<FitReport> {
    let tmax = grid.t.iter().copied().fold(0.0, f64::max);
    let tpos = grid.t.iter().copied().filter(|&t| t > 0.0).fold(f64::INFINITY, f64::min);
    let decades = (tmax / tpos).log10();
    if decades < 4.0 {
        return Err(MctError::ShortGrid { decades });
    }
    let rows = window_rows(grid, window);
    if rows.len() < 5 {
        return Err(MctError::TooFewPoints { need: 5, got: rows.len() });
    }
    let ts: Vec<f64> = rows.iter().map(|&i| grid.t[i]).collect();
    let cols: Vec<usize> = (0..grid.q.len()).filter(|&j| grid.q[j] <= window.q_max).collect();
    if cols.is_empty() {
        return Err(MctError::TooFewPoints { need: 1, got: 0 });
    }
    let mut per_q = Vec::with_capacity(cols.len());
    for &j in &cols {
        let r: Vec<f64> = rows.iter().map(|&i| grid.excess(i, j)).collect();
        if r.iter().any(|&x| !(x > 0.0)) {
            return Err(MctError::Config(format!("non-positive excess cumulant at q = {:e}; is lambda > 0?", grid.q[j])));
        }
        let delta = minimize_delta(&ts, &r, window.delta_lo, window.delta_hi)?;
        let (c, residual) = fit_fixed(&ts, &r, delta);
        per_q.push(QFit { q: grid.q[j], delta, c, residual });
    }
    let k = per_q.len() as f64;
    let delta = per_q.iter().map(|f| f.delta).sum::<f64>() / k;
    let c = per_q.iter().map(|f| f.c).sum::<f64>() / k;
    let residual = per_q.iter().map(|f| f.residual).sum::<f64>() / k;
    let band = per_q.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), f| (a.min(f.delta), b.max(f.delta)));
    Ok(FitReport { delta, c, delta_band: band, residual, window: *window, n_times: ts.len(), per_q })
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Slope mismatch, in `log`-`log log t` coordinates, between the two sides of
/// the matching condition at the smallest wavenumber of the window:
/// `d/dt [c t (log t)^delta]` with `c` fitted for this `delta`, against the
/// memory term `g lambda^2 G_q(t)` of the evolved solution.
pub fn consistency_residual(delta: f64, grid: &MctGrid, window: &FitWindow) -> Result<f64> {
    if grid.coupling == 0.0 {
        return Ok(0.0);
    }
    let rows = window_rows(grid, window);
    if rows.len() < 5 {
        return Err(MctError::TooFewPoints { need: 5, got: rows.len() });
    }
    let j = 0;
    let ts: Vec<f64> = rows.iter().map(|&i| grid.t[i]).collect();
    let r: Vec<f64> = rows.iter().map(|&i| grid.excess(i, j)).collect();
    let (c, _) = fit_fixed(&ts, &r, delta);
    let x: Vec<f64> = ts.iter().map(|t| t.ln().ln()).collect();
    let lhs: Vec<f64> = ts
        .iter()
        .map(|t| {
            let lt = t.ln();
            (c * lt.powf(delta) + c * delta * lt.powf(delta - 1.0)).ln()
        })
        .collect();
    let rhs: Vec<f64> = rows.iter().map(|&i| (grid.coupling * grid.memory[i][j]).ln()).collect();
    Ok((slope(&x, &lhs) - slope(&x, &rhs)).abs())
}
