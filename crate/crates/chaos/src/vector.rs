//! Truncated Fock space and vectors on it.

use std::sync::Arc;

use akpz_core::{Mode, ModeLattice};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::basis::ChaosBasis;

/// Bases of orders `0..=n_max`, all in the same momentum sector if one is set.
#[derive(Clone, Debug)]
pub struct FockSpace {
    levels: Vec<ChaosBasis>,
}

impl FockSpace {
    pub fn new(lattice: Arc<ModeLattice>, n_max: usize, sector: Option<Mode>) -> Self {
        let levels = (0..=n_max).map(|n| ChaosBasis::build(lattice.clone(), n, sector)).collect();
        Self { levels }
    }

    pub fn n_max(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> &ChaosBasis {
        &self.levels[n]
    }

    pub fn levels(&self) -> &[ChaosBasis] {
        &self.levels
    }

    pub fn lattice(&self) -> &Arc<ModeLattice> {
        self.levels[0].lattice()
    }

    pub fn dim(&self) -> usize {
        self.levels.iter().map(|b| b.len()).sum()
    }

    pub fn zeros(&self) -> ChaosVector {
        ChaosVector { orders: self.levels.iter().map(|b| vec![Complex64::new(0.0, 0.0); b.len()]).collect() }
    }

    /// Gaussian coefficients on every level.
    pub fn random<R: Rng>(&self, rng: &mut R) -> ChaosVector {
        let mut v = self.zeros();
        for c in v.orders.iter_mut().flatten() {
            *c = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
        v
    }

    pub fn inner(&self, f: &ChaosVector, g: &ChaosVector) -> Complex64 {
        self.levels
            .iter()
            .enumerate()
            .map(|(n, b)| weighted_inner(b, &f.orders[n], &g.orders[n]))
            .sum()
    }

    pub fn norm2(&self, f: &ChaosVector) -> f64 {
        self.inner(f, f).re
    }
}

/// `sum_i w_i f_i conj(g_i)` on one level.
pub fn weighted_inner(basis: &ChaosBasis, f: &[Complex64], g: &[Complex64]) -> Complex64 {
    assert_eq!(f.len(), basis.len());
    assert_eq!(g.len(), basis.len());
    (0..basis.len()).map(|i| f[i] * g[i].conj() * basis.weight(i)).sum()
}

/// Per-order coefficients of a symmetric kernel, one value per multiset.
#[derive(Clone, Debug, PartialEq)]
pub struct ChaosVector {
    pub orders: Vec<Vec<Complex64>>,
}

impl ChaosVector {
    pub fn order(&self, n: usize) -> &[Complex64] {
        &self.orders[n]
    }

    pub fn is_finite(&self) -> bool {
        self.orders.iter().flatten().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn axpy(&mut self, a: Complex64, other: &ChaosVector) {
        for (x, y) in self.orders.iter_mut().flatten().zip(other.orders.iter().flatten()) {
            *x += a * y;
        }
    }
}
