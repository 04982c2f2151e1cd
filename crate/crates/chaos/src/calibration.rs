//! Scalar summaries of the operator and Fock-space calibration checks.

use std::sync::Arc;

use akpz_core::observables::wick_variance_nonlinearity;
use akpz_core::{ModeLattice, TestFunction};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::basis::ChaosBasis;
use crate::error::Result;
use crate::hierarchy::Hierarchy;
use crate::operator::{build_aminus, build_aplus};
use crate::vector::weighted_inner;

/// Largest `|<A+ f, g> + <f, A- g>| / (|f| |g|)` over random pairs, for
/// `A+` from order `n` to `n + 1` with `n = 1..=max_order`.
pub fn adjointness_defect(lattice: &Arc<ModeLattice>, lambda: f64, max_order: usize, n_pairs: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut random = |d: usize| -> Vec<Complex64> {
        (0..d).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect()
    };
    let mut worst: f64 = 0.0;
    for n in 1..=max_order {
        let src = ChaosBasis::full(lattice.clone(), n);
        let dst = ChaosBasis::full(lattice.clone(), n + 1);
        let ap = build_aplus(&src, &dst, lambda);
        let am = build_aminus(&dst, &src, lambda);
        for _ in 0..n_pairs {
            let f = random(src.len());
            let g = random(dst.len());
            let lhs = weighted_inner(&dst, &ap.apply(&f), &g);
            let rhs = weighted_inner(&src, &f, &am.apply(&g));
            let scale = (weighted_inner(&src, &f, &f).re * weighted_inner(&dst, &g, &g).re).sqrt();
            worst = worst.max((lhs + rhs).norm() / scale);
        }
    }
    worst
}

/// `|Fock norm^2 of n_phi - Wick variance| / Wick variance`.
pub fn wick_defect(phi: &TestFunction, lambda: f64) -> Result<f64> {
    let h = Hierarchy::new(phi, lambda, 2)?;
    let wick = wick_variance_nonlinearity(phi, phi.lattice().cutoff(), lambda);
    let fock = h.n_phi_norm2();
    Ok(if wick > 0.0 { (fock - wick).abs() / wick } else { fock.abs() })
}
