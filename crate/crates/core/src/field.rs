use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::ModeLattice;

/// Fourier coefficients of a real field on the torus, one per lattice slot,
/// plus the separately carried zero mode.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    lattice: Arc<ModeLattice>,
    pub coeffs: Vec<Complex64>,
    pub zero_mode: f64,
}

impl SpectralField {
    pub fn zeros(lattice: Arc<ModeLattice>) -> Self {
        let n = lattice.len();
        Self { lattice, coeffs: vec![Complex64::new(0.0, 0.0); n], zero_mode: 0.0 }
    }

    pub fn from_coeffs(lattice: Arc<ModeLattice>, coeffs: Vec<Complex64>, zero_mode: f64) -> Result<Self> {
        if coeffs.len() != lattice.len() {
            return Err(Error::Shape(format!("{} coefficients for {} modes", coeffs.len(), lattice.len())));
        }
        Ok(Self { lattice, coeffs, zero_mode })
    }

    pub fn lattice(&self) -> &Arc<ModeLattice> {
        &self.lattice
    }

    /// Largest deviation from `c[-k] = conj(c[k])`.
    pub fn reality_defect(&self) -> f64 {
        let lat = &self.lattice;
        (0..lat.len())
            .map(|s| (self.coeffs[lat.conj_index(s)] - self.coeffs[s].conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.reality_defect() == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.zero_mode.is_finite() && self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Overwrite the non-representative half with conjugates of the representatives.
    pub fn enforce_reality(&mut self) {
        let lat = self.lattice.clone();
        for s in lat.representatives() {
            self.coeffs[lat.conj_index(s)] = self.coeffs[s].conj();
        }
    }

    /// Sharp projection onto `|k| <= m`.
    pub fn project_cutoff(&self, m: u32) -> Result<Self> {
        if m > self.lattice.cutoff() {
            return Err(Error::ProjectionCutoff { requested: m, lattice: self.lattice.cutoff() });
        }
        let m2 = (m as i64) * (m as i64);
        let mut out = self.clone();
        for (s, c) in out.coeffs.iter_mut().enumerate() {
            if self.lattice.mode(s).norm2() > m2 {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        Ok(out)
    }

    /// `h(k) = u(k) / |k|`, zero mode passed through.
    pub fn height_from_velocity(&self) -> Self {
        let mut out = self.clone();
        for (s, c) in out.coeffs.iter_mut().enumerate() {
            *c /= self.lattice.norm(s);
        }
        out
    }

    /// Inverse of [`height_from_velocity`](Self::height_from_velocity).
    pub fn velocity_from_height(&self) -> Self {
        let mut out = self.clone();
        for (s, c) in out.coeffs.iter_mut().enumerate() {
            *c *= self.lattice.norm(s);
        }
        out
    }
}
