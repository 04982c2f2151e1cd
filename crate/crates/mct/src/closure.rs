//! Radially symmetric mode-coupling closure for the structure function.
//!
//! With `s = S/S(0,0)` and the small-`k` form of the self-energy the closure
//! reads
//!
//! ```text
//! d/dt log s(t,q) = -q^2/2 - q^2 g lambda^2 G_q(t),
//! G_q(t) = int_0^t e^{-q^2 (t-s)/2} Sigma(s) ds,   Sigma(t) = int_0^1 2 l s(t,l)^2 dl,
//! ```
//!
//! where `g` is the normalization constant. The state is kept as the
//! reduced cumulant `y = -log s / q^2`, so `s` stays positive and tiny
//! wavenumbers lose no precision. `G` is advanced by the exact recursion
//! for an exponential kernel with `Sigma` linear over each step, so no
//! history is stored.

use std::f64::consts::PI;
use std::io::Write;

use akpz_core::numerics::{phi1_neg, phi2_neg};
use serde::{Deserialize, Serialize};

use crate::error::{MctError, Result};

/// Memory kernel of the self-energy integral.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryKernel {
    /// `e^{-q^2 (t-s)/2}` replaced by 1.
    #[default]
    Approximated,
    Full,
}

/// Prefactor convention.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Normalization {
    /// `g = gamma`, with unit angular weight.
    Reduced { gamma: f64 },
    /// `g = 2 (2 pi)^{-4} S(0,0) 2 pi A / 2` with `S(0,0) = (2 pi)^{-2}` and
    /// the angular average `A = (2 pi)^{-2} / 2`.
    Literal,
}

impl Default for Normalization {
    fn default() -> Self {
        Normalization::Reduced { gamma: 1.0 }
    }
}

impl Normalization {
    pub fn constant(&self) -> f64 {
        match *self {
            Normalization::Reduced { gamma } => gamma,
            Normalization::Literal => {
                let s0 = (2.0 * PI).powi(-2);
                2.0 * (2.0 * PI).powi(-4) * s0 * 2.0 * PI * angular_kernel(0.5, 0.5, 1.0).unwrap() * 0.5
            }
        }
    }

    pub fn s0(&self) -> f64 {
        match self {
            Normalization::Reduced { .. } => 1.0,
            Normalization::Literal => (2.0 * PI).powi(-2),
        }
    }
}

/// Angle average of `(c(l,-l) / (2 pi |l|^2))^2 = cos^2(2 theta) / (2 pi)^2` over `|l| = q`,
/// times `scale`; zero outside the unit cutoff. In the small-`k` limit the
/// weight does not depend on the second wavenumber beyond its support.
pub fn angular_kernel(q: f64, q_prime: f64, scale: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(MctError::NonPositiveWavenumber(q));
    }
    if !(q_prime > 0.0) {
        return Err(MctError::NonPositiveWavenumber(q_prime));
    }
    if q > 1.0 || q_prime > 1.0 {
        return Ok(0.0);
    }
    Ok(scale * 0.5 / (2.0 * PI).powi(2))
}

/// Same average by the midpoint rule in the angle, for checking.
pub fn angular_kernel_quadrature(q: f64, n_angles: usize) -> f64 {
    (0..n_angles)
        .map(|i| {
            let th = 2.0 * PI * (i as f64 + 0.5) / n_angles as f64;
            let (l1, l2) = (q * th.cos(), q * th.sin());
            let c = l1 * l1 - l2 * l2;
            (c / (2.0 * PI * q * q)).powi(2)
        })
        .sum::<f64>()
        / n_angles as f64
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MctConfig {
    pub lambda: f64,
    #[serde(default)]
    pub normalization: Normalization,
    #[serde(default)]
    pub kernel: MemoryKernel,
    /// Smallest resolved wavenumber; the disc below it uses its cumulant.
    #[serde(default = "defaults::q_min")]
    pub q_min: f64,
    #[serde(default = "defaults::q_per_decade")]
    pub q_per_decade: usize,
    /// Step of the initial linear ramp.
    #[serde(default = "defaults::dt0")]
    pub dt0: f64,
    /// End of the linear ramp; afterwards steps grow geometrically.
    #[serde(default = "defaults::t_ramp")]
    pub t_ramp: f64,
    /// Relative step `h / t` after the ramp.
    #[serde(default = "defaults::growth")]
    pub growth: f64,
    #[serde(default = "defaults::t_final")]
    pub t_final: f64,
    /// Fixed-point sweeps per step.
    #[serde(default = "defaults::corrector_iters")]
    pub corrector_iters: usize,
}

mod defaults {
    pub fn q_min() -> f64 {
        1e-6
    }
    pub fn q_per_decade() -> usize {
        40
    }
    pub fn dt0() -> f64 {
        1e-2
    }
    pub fn t_ramp() -> f64 {
        1.0
    }
    pub fn growth() -> f64 {
        1e-2
    }
    pub fn t_final() -> f64 {
        1e6
    }
    pub fn corrector_iters() -> usize {
        3
    }
}

impl MctConfig {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            normalization: Normalization::default(),
            kernel: MemoryKernel::default(),
            q_min: defaults::q_min(),
            q_per_decade: defaults::q_per_decade(),
            dt0: defaults::dt0(),
            t_ramp: defaults::t_ramp(),
            growth: defaults::growth(),
            t_final: defaults::t_final(),
            corrector_iters: defaults::corrector_iters(),
        }
    }

    /// Halves every time step.
    pub fn refined(&self) -> Self {
        Self { dt0: self.dt0 / 2.0, growth: self.growth / 2.0, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(MctError::Config(m.into()));
        if !(self.lambda >= 0.0) {
            return bad("lambda must be >= 0");
        }
        if let Normalization::Reduced { gamma } = self.normalization {
            if !(gamma >= 0.0) {
                return bad("gamma must be >= 0");
            }
        }
        if !(self.q_min > 0.0 && self.q_min < 1.0) {
            return bad("q_min must lie in (0, 1)");
        }
        if self.q_per_decade < 2 {
            return bad("q_per_decade must be at least 2");
        }
        if !(self.dt0 > 0.0 && self.t_ramp >= self.dt0 && self.growth > 0.0 && self.t_final > self.t_ramp) {
            return bad("need 0 < dt0 <= t_ramp < t_final and growth > 0");
        }
        if self.corrector_iters == 0 {
            return bad("corrector_iters must be at least 1");
        }
        Ok(())
    }

    pub fn q_grid(&self) -> Vec<f64> {
        let decades = -self.q_min.log10();
        let n = (decades * self.q_per_decade as f64).ceil() as usize;
        (0..=n).map(|i| self.q_min * 10f64.powf(decades * i as f64 / n as f64)).collect()
    }

    pub fn t_grid(&self) -> Vec<f64> {
        let mut t = vec![0.0];
        let n_ramp = (self.t_ramp / self.dt0).round() as usize;
        for i in 1..=n_ramp {
            t.push(i as f64 * self.t_ramp / n_ramp as f64);
        }
        let mut last = self.t_ramp;
        while last < self.t_final {
            last = (last * (1.0 + self.growth)).min(self.t_final);
            t.push(last);
        }
        t
    }
}

/// Evolved closure on the `(t, q)` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MctGrid {
    pub q: Vec<f64>,
    pub t: Vec<f64>,
    /// Reduced cumulant `y(t,q) = -log(S/S0) / q^2`, row per time.
    pub y: Vec<Vec<f64>>,
    /// Memory term `G_q(t)`, row per time.
    pub memory: Vec<Vec<f64>>,
    /// Self-energy `Sigma(t)`.
    pub sigma: Vec<f64>,
    /// `g lambda^2`.
    pub coupling: f64,
    pub s0: f64,
}

impl MctGrid {
    pub fn s(&self, i: usize, j: usize) -> f64 {
        self.s0 * (-self.q[j] * self.q[j] * self.y[i][j]).exp()
    }

    /// `-log(S/S0)/q^2 - t/2`, the part of the cumulant the ansatz describes.
    pub fn excess(&self, i: usize, j: usize) -> f64 {
        self.y[i][j] - 0.5 * self.t[i]
    }

    /// Grid built from a prescribed excess `r(t, q)`, for testing fits.
    pub fn synthetic(q: Vec<f64>, t: Vec<f64>, r: impl Fn(f64, f64) -> f64) -> Self {
        let y: Vec<Vec<f64>> = t.iter().map(|&ti| q.iter().map(|&qj| 0.5 * ti + r(ti, qj)).collect()).collect();
        let memory = vec![vec![0.0; q.len()]; t.len()];
        let sigma = vec![0.0; t.len()];
        Self { q, t, y, memory, sigma, coupling: 0.0, s0: 1.0 }
    }

    /// `t,q,S` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,q,S")?;
        for i in 0..self.t.len() {
            for j in 0..self.q.len() {
                writeln!(w, "{:e},{:e},{:e}", self.t[i], self.q[j], self.s(i, j))?;
            }
        }
        Ok(())
    }
}

/// `(x^2/2 - x + 1 - e^{-x}) / x^3`, accurate near zero.
fn phi3_neg(x: f64) -> f64 {
    if x.abs() < 2e-2 {
        1.0 / 6.0 - x / 24.0 + x * x / 120.0 - x.powi(3) / 720.0 + x.powi(4) / 5040.0 - x.powi(5) / 40320.0
    } else {
        (x * x / 2.0 - x - (-x).exp_m1()) / (x * x * x)
    }
}

/// `int_0^1 2 l s(l)^2 dl`: the disc below `q[0]` with the cumulant of `q[0]`,
/// then, in `u = log l`, the integrand taken log-linear on each interval.
pub fn self_energy(q: &[f64], y: &[f64]) -> f64 {
    let q0 = q[0];
    let y0 = y[0].max(0.0);
    let mut sum = q0 * q0 * phi1_neg(2.0 * q0 * q0 * y0);
    let logf = |j: usize| (2.0 * q[j] * q[j]).ln() - 2.0 * q[j] * q[j] * y[j];
    for j in 0..q.len() - 1 {
        let h = (q[j + 1] / q[j]).ln();
        let (a, b) = (logf(j), logf(j + 1));
        // h (e^b - e^a) / (b - a)
        sum += h * a.exp() * phi1_neg(a - b);
    }
    sum
}

/// Step weights for one mode: `G` uses `(w0, w1)` on the self-energy at the
/// two ends, its integral over the step uses `(v0, v1)` plus `vg` on `G_n`.
#[derive(Copy, Clone, Debug)]
struct Weights {
    decay: f64,
    w0: f64,
    w1: f64,
    vg: f64,
    v0: f64,
    v1: f64,
}

impl Weights {
    fn new(a: f64, h: f64) -> Self {
        let x = a * h;
        let (p1, p2, p3) = (phi1_neg(x), phi2_neg(x), phi3_neg(x));
        Self {
            decay: (-x).exp(),
            w0: h * (p1 - p2),
            w1: h * p2,
            vg: h * p1,
            v0: h * h * (p2 - p3),
            v1: h * h * p3,
        }
    }
}

/// Integrates the closure over the configured grid.
pub fn evolve_s(cfg: &MctConfig) -> Result<MctGrid> {
    cfg.validate()?;
    let q = cfg.q_grid();
    let t = cfg.t_grid();
    let coupling = cfg.normalization.constant() * cfg.lambda * cfg.lambda;
    let nq = q.len();
    let mut y = vec![vec![0.0; nq]];
    let mut memory = vec![vec![0.0; nq]];
    let mut sigma = vec![self_energy(&q, &y[0])];
    let rate = |j: usize| match cfg.kernel {
        MemoryKernel::Approximated => 0.0,
        MemoryKernel::Full => 0.5 * q[j] * q[j],
    };
    for n in 0..t.len() - 1 {
        let h = t[n + 1] - t[n];
        let w: Vec<Weights> = (0..nq).map(|j| Weights::new(rate(j), h)).collect();
        let (yn, gn, sn) = (&y[n], &memory[n], sigma[n]);
        let mut s_next = sn;
        let mut y_next = vec![0.0; nq];
        let mut g_next = vec![0.0; nq];
        for _ in 0..cfg.corrector_iters {
            for j in 0..nq {
                let wj = &w[j];
                g_next[j] = wj.decay * gn[j] + wj.w0 * sn + wj.w1 * s_next;
                let int_g = wj.vg * gn[j] + wj.v0 * sn + wj.v1 * s_next;
                y_next[j] = yn[j] + 0.5 * h + coupling * int_g;
            }
            s_next = self_energy(&q, &y_next);
        }
        if let Some(j) = (0..nq).find(|&j| !y_next[j].is_finite() || !g_next[j].is_finite()) {
            return Err(MctError::Instability { t: t[n + 1], q: q[j], step: n + 1 });
        }
        if !s_next.is_finite() {
            return Err(MctError::Instability { t: t[n + 1], q: q[0], step: n + 1 });
        }
        y.push(y_next);
        memory.push(g_next);
        sigma.push(s_next);
    }
    Ok(MctGrid { q, t, y, memory, sigma, coupling, s0: cfg.normalization.s0() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi3_branches_join() {
        let x: f64 = 2e-2;
        let direct = (x * x / 2.0 - x - (-x).exp_m1()) / (x * x * x);
        assert!((phi3_neg(x * (1.0 - 1e-12)) - direct).abs() < 1e-7);
        assert!((phi3_neg(0.0) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn self_energy_of_unit_field() {
        let cfg = MctConfig::new(1.0);
        let q = cfg.q_grid();
        let s = self_energy(&q, &vec![0.0; q.len()]);
        assert!((s - 1.0).abs() < 1e-12, "{s}");
    }

    #[test]
    fn grids() {
        let cfg = MctConfig::new(1.0);
        let q = cfg.q_grid();
        assert!((q[0] - 1e-6).abs() < 1e-18 && (q[q.len() - 1] - 1.0).abs() < 1e-12);
        let t = cfg.t_grid();
        assert_eq!(t[0], 0.0);
        assert!((t[100] - 1.0).abs() < 1e-12);
        assert_eq!(*t.last().unwrap(), 1e6);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
    }
}
