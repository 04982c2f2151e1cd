//! Monte Carlo summaries with batch-means error bars.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of batches used for error bars unless fewer samples are available.
pub const DEFAULT_BATCHES: usize = 30;

/// A scalar estimate with its standard error.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, stderr: 0.0, n_samples: 0 }
    }

    /// `|self - other| / sqrt(se1^2 + se2^2)`; infinite if both errors vanish and values differ.
    pub fn z_distance(&self, other: &Estimate) -> f64 {
        let d = (self.value - other.value).abs();
        let se = self.stderr.hypot(other.stderr);
        if d == 0.0 {
            0.0
        } else {
            d / se
        }
    }
}

/// Non-overlapping batch means over `values` in their given order, with
/// `min(DEFAULT_BATCHES, len)` batches of near-equal size.
pub fn batch_means(values: &[f64]) -> Result<Estimate> {
    batch_means_with(values, DEFAULT_BATCHES)
}

pub fn batch_means_with(values: &[f64], n_batches: usize) -> Result<Estimate> {
    let n = values.len();
    if n == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let b = n_batches.clamp(1, n);
    let mut means = Vec::with_capacity(b);
    for i in 0..b {
        let (lo, hi) = (i * n / b, (i + 1) * n / b);
        means.push(values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64);
    }
    let value = values.iter().sum::<f64>() / n as f64;
    let stderr = if b < 2 {
        f64::NAN
    } else {
        let m = means.iter().sum::<f64>() / b as f64;
        let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1) as f64;
        (var / b as f64).sqrt()
    };
    Ok(Estimate { value, stderr, n_samples: n })
}

/// A grid-indexed family of estimates sharing one sample count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesEstimate {
    pub abscissae: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_samples: usize,
    #[serde(default)]
    pub config_hash: Option<String>,
}

impl SeriesEstimate {
    /// Column-wise batch means over `samples[i][j]` = sample `i` at abscissa `j`.
    pub fn from_samples(abscissae: Vec<f64>, samples: &[Vec<f64>]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        let m = abscissae.len();
        if samples.iter().any(|s| s.len() != m) {
            return Err(Error::Shape(format!("expected {m} values per sample")));
        }
        let mut mean = Vec::with_capacity(m);
        let mut stderr = Vec::with_capacity(m);
        let mut col = vec![0.0; samples.len()];
        for j in 0..m {
            for (c, s) in col.iter_mut().zip(samples) {
                *c = s[j];
            }
            let e = batch_means(&col)?;
            mean.push(e.value);
            stderr.push(e.stderr);
        }
        Ok(Self { abscissae, mean, stderr, n_samples: samples.len(), config_hash: None })
    }

    pub fn exact(abscissae: Vec<f64>, mean: Vec<f64>) -> Self {
        let n = abscissae.len();
        Self { abscissae, mean, stderr: vec![0.0; n], n_samples: 0, config_hash: None }
    }

    pub fn len(&self) -> usize {
        self.abscissae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissae.is_empty()
    }

    pub fn at(&self, i: usize) -> Estimate {
        Estimate { value: self.mean[i], stderr: self.stderr[i], n_samples: self.n_samples }
    }

    /// Rows `abscissa,mean,stderr,n_samples` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("abscissa,mean,stderr,n_samples\n");
        for i in 0..self.len() {
            out.push_str(&format!(
                "{:e},{:e},{:e},{}\n",
                self.abscissae[i], self.mean[i], self.stderr[i], self.n_samples
            ));
        }
        out
    }
}

/// Linear interpolation of `ys` on the increasing grid `xs` at `x`.
pub fn interp(xs: &[f64], ys: &[f64], x: f64) -> Result<f64> {
    let horizon = *xs.last().ok_or(Error::EmptyEnsemble)?;
    if x < xs[0] - 1e-12 || x > horizon * (1.0 + 1e-12) + 1e-12 {
        return Err(Error::OutsideHorizon { t: x, horizon });
    }
    let j = xs.partition_point(|&v| v <= x);
    if j == 0 {
        return Ok(ys[0]);
    }
    if j >= xs.len() {
        return Ok(ys[xs.len() - 1]);
    }
    let (x0, x1) = (xs[j - 1], xs[j]);
    let w = (x - x0) / (x1 - x0);
    Ok(ys[j - 1] * (1.0 - w) + ys[j] * w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_means_iid() {
        let v: Vec<f64> = (0..300).map(|i| (i % 2) as f64).collect();
        let e = batch_means(&v).unwrap();
        assert_eq!(e.value, 0.5);
        assert_eq!(e.stderr, 0.0);
        let e = batch_means(&[1.0, 3.0]).unwrap();
        assert_eq!(e.value, 2.0);
        assert!((e.stderr - 1.0).abs() < 1e-15);
        assert!(batch_means(&[]).is_err());
    }

    #[test]
    fn batches_capture_correlation() {
        // AR(1) with strong correlation: batch means error must exceed the naive iid error.
        let mut x = 0.0;
        let mut state = 1u64;
        let mut v = Vec::new();
        for _ in 0..30000 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let u = ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            x = 0.99 * x + u;
            v.push(x);
        }
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let naive = (v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        let bm = batch_means(&v).unwrap();
        assert!(bm.stderr > 3.0 * naive);
    }

    #[test]
    fn interpolation() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [0.0, 10.0, 30.0];
        assert_eq!(interp(&xs, &ys, 1.5).unwrap(), 20.0);
        assert_eq!(interp(&xs, &ys, 2.0).unwrap(), 30.0);
        assert_eq!(interp(&xs, &ys, 0.0).unwrap(), 0.0);
        assert!(interp(&xs, &ys, 2.5).is_err());
    }

    #[test]
    fn csv_layout() {
        let s = SeriesEstimate::exact(vec![1.0], vec![2.0]);
        assert_eq!(s.to_csv(), "abscissa,mean,stderr,n_samples\n1e0,2e0,0e0,0\n");
    }
}
