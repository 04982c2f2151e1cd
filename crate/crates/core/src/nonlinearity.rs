//! Evaluation of `M_k[u] = |k| sum_{l+m=k} K^N_{l,m} u(l) u(m)` and of its zero component.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::kernel::kernel_unchecked;
use crate::lattice::{Mode, ModeLattice};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Convolution sum evaluated pair by pair; O(N^4) per call.
    Direct,
    /// Pseudo-spectral product on a zero-padded physical grid.
    #[default]
    Fft,
}

/// Smallest physical grid that keeps the retained modes free of aliasing.
pub fn min_fft_grid(cutoff_n: u32) -> usize {
    3 * cutoff_n as usize + 1
}

/// Default physical grid size, `4N`.
pub fn default_fft_grid(cutoff_n: u32) -> usize {
    (4 * cutoff_n as usize).max(min_fft_grid(cutoff_n))
}

/// Reusable evaluator. Holds FFT plans and scratch space, so one per thread.
pub struct Nonlinearity {
    lattice: Arc<ModeLattice>,
    cutoff_n: u32,
    imp: Imp,
}

enum Imp {
    Direct,
    Fft(Box<FftGrid>),
}

struct FftGrid {
    g: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
    /// Grid index of each slot, or `usize::MAX` if the slot is above the cutoff.
    index: Vec<usize>,
    /// `(i k1 - k2) / |k|`: packs both Riesz components into one complex field.
    riesz: Vec<Complex64>,
}

impl Nonlinearity {
    pub fn new(lattice: Arc<ModeLattice>, cutoff_n: u32, backend: Backend) -> Result<Self> {
        let grid = match backend {
            Backend::Direct => None,
            Backend::Fft => Some(default_fft_grid(cutoff_n)),
        };
        Self::with_grid(lattice, cutoff_n, grid)
    }

    /// `grid = None` selects the direct backend.
    pub fn with_grid(lattice: Arc<ModeLattice>, cutoff_n: u32, grid: Option<usize>) -> Result<Self> {
        if cutoff_n == 0 {
            return Err(Error::ZeroCutoff(0));
        }
        if cutoff_n > lattice.cutoff() {
            return Err(Error::LatticeMismatch { field: lattice.cutoff(), requested: cutoff_n });
        }
        let imp = match grid {
            None => Imp::Direct,
            Some(g) => {
                let min = min_fft_grid(cutoff_n);
                if g < min {
                    return Err(Error::FftGridTooSmall { grid: g, cutoff: cutoff_n, min });
                }
                Imp::Fft(Box::new(FftGrid::new(&lattice, cutoff_n, g)))
            }
        };
        Ok(Self { lattice, cutoff_n, imp })
    }

    pub fn lattice(&self) -> &Arc<ModeLattice> {
        &self.lattice
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff_n
    }

    pub fn backend(&self) -> Backend {
        match self.imp {
            Imp::Direct => Backend::Direct,
            Imp::Fft(_) => Backend::Fft,
        }
    }

    /// Writes `M_k` into `out` (slot order, conjugate-symmetric) and returns the
    /// real zero component `sum_l K_{l,-l} |u(l)|^2`.
    pub fn eval_into(&mut self, u: &[Complex64], out: &mut [Complex64]) -> f64 {
        assert_eq!(u.len(), self.lattice.len());
        assert_eq!(out.len(), self.lattice.len());
        match &mut self.imp {
            Imp::Direct => direct(&self.lattice, self.cutoff_n, u, out),
            Imp::Fft(grid) => grid.eval(&self.lattice, u, out),
        }
    }

    pub fn eval(&mut self, field: &SpectralField) -> Result<(SpectralField, f64)> {
        if !Arc::ptr_eq(field.lattice(), &self.lattice) && **field.lattice() != *self.lattice {
            return Err(Error::LatticeMismatch { field: field.lattice().cutoff(), requested: self.lattice.cutoff() });
        }
        let mut out = SpectralField::zeros(self.lattice.clone());
        let n0 = self.eval_into(&field.coeffs, &mut out.coeffs);
        Ok((out, n0))
    }
}

/// One-shot evaluation; see [`Nonlinearity`] for repeated use.
pub fn nonlinearity(field: &SpectralField, cutoff_n: u32, backend: Backend) -> Result<(SpectralField, f64)> {
    if cutoff_n > field.lattice().cutoff() {
        return Err(Error::LatticeMismatch { field: field.lattice().cutoff(), requested: cutoff_n });
    }
    Nonlinearity::new(field.lattice().clone(), cutoff_n, backend)?.eval(field)
}

fn direct(lat: &ModeLattice, n: u32, u: &[Complex64], out: &mut [Complex64]) -> f64 {
    let n2 = (n as i64) * (n as i64);
    let zero = Complex64::new(0.0, 0.0);
    out.iter_mut().for_each(|c| *c = zero);
    for s in lat.representatives() {
        let k = lat.mode(s);
        if k.norm2() > n2 {
            continue;
        }
        let mut acc = zero;
        for (sl, &l) in lat.modes().iter().enumerate() {
            if l.norm2() > n2 {
                continue;
            }
            let m = k - l;
            if let Some(sm) = lat.slot(m) {
                let kv = kernel_unchecked(l, m, n);
                if kv != 0.0 {
                    acc += u[sl] * u[sm] * kv;
                }
            }
        }
        out[s] = acc * lat.norm(s);
        out[lat.conj_index(s)] = out[s].conj();
    }
    let mut n0 = 0.0;
    for (sl, &l) in lat.modes().iter().enumerate() {
        if l.norm2() <= n2 {
            n0 += kernel_unchecked(l, -l, n) * u[sl].norm_sqr();
        }
    }
    n0
}

impl FftGrid {
    fn new(lat: &ModeLattice, n: u32, g: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(g);
        let inv = planner.plan_fft_inverse(g);
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        let n2 = (n as i64) * (n as i64);
        let wrap = |x: i32| x.rem_euclid(g as i32) as usize;
        let mut index = vec![usize::MAX; lat.len()];
        let mut riesz = vec![Complex64::new(0.0, 0.0); lat.len()];
        for (s, &Mode(k1, k2)) in lat.modes().iter().enumerate() {
            if Mode(k1, k2).norm2() <= n2 {
                index[s] = wrap(k1) * g + wrap(k2);
                riesz[s] = Complex64::new(-k2 as f64, k1 as f64) / lat.norm(s);
            }
        }
        Self {
            g,
            fwd,
            inv,
            buf: vec![Complex64::new(0.0, 0.0); g * g],
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            index,
            riesz,
        }
    }

    fn transform(&mut self, forward: bool) {
        let plan = if forward { &self.fwd } else { &self.inv };
        plan.process_with_scratch(&mut self.buf, &mut self.scratch);
        transpose(&mut self.buf, self.g);
        plan.process_with_scratch(&mut self.buf, &mut self.scratch);
        transpose(&mut self.buf, self.g);
    }

    fn eval(&mut self, lat: &ModeLattice, u: &[Complex64], out: &mut [Complex64]) -> f64 {
        let zero = Complex64::new(0.0, 0.0);
        self.buf.iter_mut().for_each(|c| *c = zero);
        for s in 0..lat.len() {
            if self.index[s] != usize::MAX {
                self.buf[self.index[s]] = self.riesz[s] * u[s];
            }
        }
        // c(x) = a(x) + i b(x) with a, b the two real Riesz-type fields; a^2 - b^2 = Re c^2.
        self.transform(false);
        for c in self.buf.iter_mut() {
            *c = Complex64::new(c.re * c.re - c.im * c.im, 0.0);
        }
        self.transform(true);
        let scale = 1.0 / (2.0 * PI * (self.g * self.g) as f64);
        for s in lat.representatives() {
            if self.index[s] == usize::MAX {
                out[s] = zero;
            } else {
                out[s] = self.buf[self.index[s]] * (scale * lat.norm(s));
            }
            out[lat.conj_index(s)] = out[s].conj();
        }
        self.buf[0].re * scale
    }
}

fn transpose(buf: &mut [Complex64], g: usize) {
    for i in 0..g {
        for j in i + 1..g {
            buf.swap(i * g + j, j * g + i);
        }
    }
}
