//! Real test functions on the torus, given by their Fourier coefficients.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::lattice::{Mode, ModeLattice};

/// Radial Fourier profiles `p -> phi_hat(p)` on the plane, used to build
/// the rescaled test functions `phi^(a)` with coefficients `phi_hat(j / a)`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    /// `(1 - |p|^2/R^2)^3` inside the disc of radius `R`.
    Bump { radius: f64 },
    /// `(|p|^2/R^2) (1 - |p|^2/R^2)^3`, which vanishes at the origin.
    ZeroMassBump { radius: f64 },
}

impl Profile {
    pub fn support_radius(&self) -> f64 {
        match *self {
            Profile::Bump { radius } | Profile::ZeroMassBump { radius } => radius,
        }
    }

    pub fn value(&self, p1: f64, p2: f64) -> f64 {
        let r = self.support_radius();
        let s = (p1 * p1 + p2 * p2) / (r * r);
        if s >= 1.0 {
            return 0.0;
        }
        let bump = (1.0 - s).powi(3);
        match self {
            Profile::Bump { .. } => bump,
            Profile::ZeroMassBump { .. } => s * bump,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    pub id: String,
    lattice: Arc<ModeLattice>,
    /// `phi_hat(k)` per lattice slot.
    pub coeffs: Vec<Complex64>,
    /// `phi_hat(0)`.
    pub zero: f64,
}

impl TestFunction {
    pub fn new(id: impl Into<String>, lattice: Arc<ModeLattice>, coeffs: Vec<Complex64>, zero: f64) -> Result<Self> {
        let id = id.into();
        if coeffs.len() != lattice.len() {
            return Err(Error::Shape(format!("{} coefficients for {} modes", coeffs.len(), lattice.len())));
        }
        let tf = Self { id, lattice, coeffs, zero };
        let scale = tf.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for s in 0..tf.lattice.len() {
            let d = (tf.coeffs[tf.lattice.conj_index(s)] - tf.coeffs[s].conj()).norm();
            if d > 1e-14 * scale.max(1.0) {
                return Err(Error::NotReal(tf.id));
            }
        }
        Ok(tf)
    }

    /// The constant function with `phi_hat(0) = 1`.
    pub fn e0(lattice: Arc<ModeLattice>) -> Self {
        let n = lattice.len();
        Self { id: "e0".into(), lattice, coeffs: vec![Complex64::new(0.0, 0.0); n], zero: 1.0 }
    }

    /// `phi_hat(k) = amp`, `phi_hat(-k) = conj(amp)`, all else zero.
    pub fn single_mode(id: impl Into<String>, lattice: Arc<ModeLattice>, k: Mode, amp: Complex64) -> Result<Self> {
        let s = lattice.slot(k).ok_or(Error::UnsupportedSupport {
            id: "single_mode".into(),
            radius: k.norm(),
            cutoff: lattice.cutoff(),
        })?;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); lattice.len()];
        coeffs[s] = amp;
        coeffs[lattice.conj_index(s)] = amp.conj();
        Self::new(id, lattice, coeffs, 0.0)
    }

    /// `phi^(a)`: coefficient at `j` is `profile(j / a)`. Fails unless the
    /// rescaled support `a R` fits inside the lattice cutoff.
    pub fn from_profile(id: impl Into<String>, lattice: Arc<ModeLattice>, profile: Profile, a: f64) -> Result<Self> {
        let id = id.into();
        let radius = a * profile.support_radius();
        if !(a > 0.0) || radius > lattice.cutoff() as f64 + 1e-12 {
            return Err(Error::UnsupportedSupport { id, radius, cutoff: lattice.cutoff() });
        }
        let coeffs = lattice
            .modes()
            .iter()
            .map(|k| Complex64::new(profile.value(k.0 as f64 / a, k.1 as f64 / a), 0.0))
            .collect();
        let zero = profile.value(0.0, 0.0);
        Self::new(id, lattice, coeffs, zero)
    }

    pub fn lattice(&self) -> &Arc<ModeLattice> {
        &self.lattice
    }

    pub fn zero_mass(&self) -> bool {
        self.zero == 0.0
    }

    /// `phi_hat(-k)` for the mode in `slot`.
    #[inline]
    pub fn at_neg(&self, slot: usize) -> Complex64 {
        self.coeffs[self.lattice.conj_index(slot)]
    }

    /// `sum_k |phi_hat(k)|^2`, zero mode included.
    pub fn norm2(&self) -> f64 {
        self.zero * self.zero + self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Same as [`norm2`](Self::norm2) without the zero mode.
    pub fn norm2_nonzero_modes(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `h[phi] = sum_k h_hat(k) phi_hat(-k)` for a height field given in Fourier space.
    pub fn pair(&self, h: &SpectralField) -> f64 {
        self.pair_coeffs(&h.coeffs, h.zero_mode)
    }

    pub fn pair_coeffs(&self, coeffs: &[Complex64], zero: f64) -> f64 {
        let mut acc = 0.0;
        for (s, c) in coeffs.iter().enumerate() {
            acc += (c * self.at_neg(s)).re;
        }
        acc + zero * self.zero
    }

    /// The largest `|k|` carrying a nonzero coefficient (0 for `e0`).
    pub fn support_radius(&self) -> f64 {
        (0..self.lattice.len())
            .filter(|&s| self.coeffs[s].norm() > 0.0)
            .map(|s| self.lattice.norm(s))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles() {
        let b = Profile::Bump { radius: 2.0 };
        assert_eq!(b.value(0.0, 0.0), 1.0);
        assert_eq!(b.value(2.0, 0.0), 0.0);
        assert!((b.value(1.0, 0.0) - 0.421875).abs() < 1e-15);
        let z = Profile::ZeroMassBump { radius: 2.0 };
        assert_eq!(z.value(0.0, 0.0), 0.0);
        assert!(z.value(1.0, 0.0) > 0.0);
    }

    #[test]
    fn rescaled_support() {
        let lat = Arc::new(ModeLattice::new(8).unwrap());
        let phi = TestFunction::from_profile("b", lat.clone(), Profile::Bump { radius: 1.0 }, 8.0).unwrap();
        assert!(!phi.zero_mass());
        assert!(phi.support_radius() < 8.0);
        assert!(TestFunction::from_profile("b", lat.clone(), Profile::Bump { radius: 1.0 }, 9.0).is_err());
        let z = TestFunction::from_profile("z", lat, Profile::ZeroMassBump { radius: 2.0 }, 3.0).unwrap();
        assert!(z.zero_mass());
    }

    #[test]
    fn pairing() {
        let lat = Arc::new(ModeLattice::new(2).unwrap());
        let e0 = TestFunction::e0(lat.clone());
        let mut h = SpectralField::zeros(lat.clone());
        h.zero_mode = 2.5;
        assert_eq!(e0.pair(&h), 2.5);
        let phi = TestFunction::single_mode("m", lat.clone(), Mode(1, 1), Complex64::new(0.0, 1.0)).unwrap();
        let s = lat.slot(Mode(1, 1)).unwrap();
        h.coeffs[s] = Complex64::new(0.0, 1.0);
        h.coeffs[lat.conj_index(s)] = Complex64::new(0.0, -1.0);
        // h(k) phi(-k) + h(-k) phi(k) = i(-i) + (-i)(i) = 2
        assert!((phi.pair(&h) - 2.0).abs() < 1e-15);
        assert_eq!(phi.norm2(), 2.0);
    }

    #[test]
    fn rejects_non_real() {
        let lat = Arc::new(ModeLattice::new(1).unwrap());
        let mut c = vec![Complex64::new(0.0, 0.0); 4];
        c[0] = Complex64::new(1.0, 0.0);
        assert!(TestFunction::new("x", lat, c, 0.0).is_err());
    }
}
