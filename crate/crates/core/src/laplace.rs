//! Exponentially weighted transforms `mu int_0^inf e^{-mu t} f(t) dt` of gridded data.
//!
//! `f` is interpolated linearly between grid points and the weight is
//! integrated exactly on each interval, so linear data is transformed
//! exactly. Beyond the last point `f` is continued along its final slope;
//! that tail contribution is added to the value and its magnitude to the
//! error bar.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{phi1_neg, xe_weight};
use crate::stats::{batch_means, SeriesEstimate};

/// Default ceiling on `|tail| / |value|`.
pub const DEFAULT_TAIL_TOL: f64 = 0.01;

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplaceEstimate {
    pub mu: f64,
    pub value: f64,
    /// Statistical error plus `|tail|`.
    pub error: f64,
    pub tail: f64,
    pub n_samples: usize,
}

/// Quadrature weights `w_i` with `sum_i w_i f_i` equal to the on-grid part of the transform.
pub fn weights(grid: &[f64], mu: f64) -> Result<Vec<f64>> {
    if !(mu > 0.0) {
        return Err(Error::NonPositiveMu(mu));
    }
    if grid.len() < 2 || grid[0] != 0.0 {
        return Err(Error::Shape("laplace grid must start at 0 and have at least two points".into()));
    }
    let mut w = vec![0.0; grid.len()];
    for i in 0..grid.len() - 1 {
        let h = grid[i + 1] - grid[i];
        if !(h > 0.0) {
            return Err(Error::Shape("laplace grid must be strictly increasing".into()));
        }
        let x = mu * h;
        let e = (-mu * grid[i]).exp();
        let beta = xe_weight(x);
        let alpha = x * phi1_neg(x) - beta;
        w[i] += e * alpha;
        w[i + 1] += e * beta;
    }
    Ok(w)
}

/// Linear continuation beyond the last grid point: `e^{-mu T} (f(T) + f'(T)/mu)`.
fn tail(grid: &[f64], f: &[f64], mu: f64) -> f64 {
    let n = grid.len();
    let slope = (f[n - 1] - f[n - 2]) / (grid[n - 1] - grid[n - 2]);
    (-mu * grid[n - 1]).exp() * (f[n - 1] + slope / mu)
}

fn check_tail(value: f64, tail: f64, tol: f64) -> Result<()> {
    if tail.abs() > tol * value.abs() {
        return Err(Error::InsufficientHorizon { tail, value, tol });
    }
    Ok(())
}

/// Transform of a deterministic or averaged series. `stderr`, when given,
/// is propagated as a weighted sum (exact for fully correlated errors).
pub fn laplace_weighted(grid: &[f64], f: &[f64], stderr: Option<&[f64]>, mu: f64, tol: f64) -> Result<LaplaceEstimate> {
    if f.len() != grid.len() || stderr.is_some_and(|s| s.len() != grid.len()) {
        return Err(Error::Shape("values and grid differ in length".into()));
    }
    let w = weights(grid, mu)?;
    let t = tail(grid, f, mu);
    let value = w.iter().zip(f).map(|(a, b)| a * b).sum::<f64>() + t;
    check_tail(value, t, tol)?;
    let se = stderr.map_or(0.0, |s| w.iter().zip(s).map(|(a, b)| a * b).sum::<f64>());
    Ok(LaplaceEstimate { mu, value, error: se + t.abs(), tail: t, n_samples: 0 })
}

pub fn laplace_series(series: &SeriesEstimate, mu: f64, tol: f64) -> Result<LaplaceEstimate> {
    let mut e = laplace_weighted(&series.abscissae, &series.mean, Some(&series.stderr), mu, tol)?;
    e.n_samples = series.n_samples;
    Ok(e)
}

/// Transform each sample path, then average with batch-means error bars.
/// The tail is taken from the averaged path.
pub fn laplace_samples(grid: &[f64], samples: &[Vec<f64>], mu: f64, tol: f64) -> Result<LaplaceEstimate> {
    if samples.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let w = weights(grid, mu)?;
    let mut per = Vec::with_capacity(samples.len());
    let mut mean = vec![0.0; grid.len()];
    for s in samples {
        if s.len() != grid.len() {
            return Err(Error::Shape("sample path and grid differ in length".into()));
        }
        per.push(w.iter().zip(s).map(|(a, b)| a * b).sum::<f64>());
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v / samples.len() as f64;
        }
    }
    let est = batch_means(&per)?;
    let t = tail(grid, &mean, mu);
    let value = est.value + t;
    check_tail(value, t, tol)?;
    Ok(LaplaceEstimate { mu, value, error: est.stderr + t.abs(), tail: t, n_samples: samples.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(h: f64, t: f64) -> Vec<f64> {
        (0..=(t / h).round() as usize).map(|i| i as f64 * h).collect()
    }

    #[test]
    fn polynomials_of_degree_one_are_exact() {
        let g = grid(0.1, 40.0);
        for mu in [0.5, 1.0, 3.0] {
            let ones = vec![1.0; g.len()];
            let e = laplace_weighted(&g, &ones, None, mu, 1e-2).unwrap();
            assert!((e.value - 1.0).abs() < 1e-12);
            let e = laplace_weighted(&g, &g, None, mu, 1e-2).unwrap();
            assert!((e.value - 1.0 / mu).abs() < 1e-12);
        }
    }

    #[test]
    fn smooth_function() {
        // mu int e^{-mu t} e^{-t} dt = mu / (mu + 1)
        let g = grid(0.01, 30.0);
        let f: Vec<f64> = g.iter().map(|t| (-t).exp()).collect();
        let e = laplace_weighted(&g, &f, None, 2.0, 1e-2).unwrap();
        assert!((e.value - 2.0 / 3.0).abs() < 1e-5);
    }

    #[test]
    fn errors() {
        let g = grid(0.1, 1.0);
        let ones = vec![1.0; g.len()];
        assert!(matches!(laplace_weighted(&g, &ones, None, 0.0, 1e-2), Err(Error::NonPositiveMu(_))));
        assert!(matches!(
            laplace_weighted(&g, &ones, None, 1.0, 1e-2),
            Err(Error::InsufficientHorizon { .. })
        ));
    }

    #[test]
    fn sample_average() {
        let g = grid(0.05, 30.0);
        let a: Vec<f64> = g.iter().map(|t| 2.0 * t).collect();
        let b: Vec<f64> = g.iter().map(|_| 0.0).collect();
        let e = laplace_samples(&g, &[a, b], 1.0, 1e-2).unwrap();
        assert!((e.value - 1.0).abs() < 1e-10);
        assert!((e.error - e.tail.abs() - 1.0).abs() < 1e-10);
    }
}
