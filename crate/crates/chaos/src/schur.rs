//! Schur operators `H_k` on the second chaos: positivity and comparison with
//! the explicit multiplier bounds.

use std::sync::Arc;

use akpz_core::ModeLattice;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::basis::ChaosBasis;
use crate::error::{ChaosError, Result};
use crate::hierarchy::SectorBlocks;
use crate::multipliers::{s_diag, MultiplierParams};

/// `H_k` restricted to each momentum sector of the second chaos.
#[derive(Clone, Debug)]
pub struct SchurOperators {
    pub mu: f64,
    pub k: usize,
    /// Per sector: order-2 basis, and `H_k` in multiset coordinates.
    pub blocks: Vec<(ChaosBasis, DMatrix<f64>)>,
}

impl SchurOperators {
    pub fn new(lattice: &Arc<ModeLattice>, lambda: f64, mu: f64, k: usize) -> Result<Self> {
        if k < 3 {
            return Err(ChaosError::Truncation(k));
        }
        if !(mu > 0.0) {
            return Err(ChaosError::NonPositiveMu(mu));
        }
        let full = ChaosBasis::full(lattice.clone(), 2);
        let blocks = full
            .sectors()
            .into_iter()
            .map(|p| {
                let b2 = ChaosBasis::sector(lattice.clone(), 2, p);
                let zeros = vec![Complex64::new(0.0, 0.0); b2.len()];
                let sec = SectorBlocks::new(lattice.clone(), p, k, lambda, zeros);
                Ok((b2, sec.h_operator(mu, k)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { mu, k, blocks })
    }
}

/// `W^{1/2} H W^{-1/2}`, symmetric when `H` is self-adjoint for the weights `W`.
fn symmetrized(basis: &ChaosBasis, h: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let w: Vec<f64> = basis.weights().iter().map(|x| x.sqrt()).collect();
    let m = DMatrix::from_fn(h.nrows(), h.ncols(), |i, j| w[i] * h[(i, j)] / w[j]);
    let asym = (&m - m.transpose()).norm();
    ((&m + m.transpose()) * 0.5, asym)
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityRow {
    pub k: usize,
    pub mu: f64,
    pub min_eigenvalue: f64,
    pub norm: f64,
    /// Frobenius norm of the skew part relative to `norm`.
    pub asymmetry: f64,
    pub passed: bool,
}

/// Smallest eigenvalue of `H_3..=H_{k_max}` on the whole second chaos.
pub fn schur_positivity_check(lattice: &Arc<ModeLattice>, lambda: f64, mu: f64, k_max: usize) -> Result<Vec<PositivityRow>> {
    (3..=k_max)
        .map(|k| {
            let ops = SchurOperators::new(lattice, lambda, mu, k)?;
            let mut min_eig = f64::INFINITY;
            let mut norm: f64 = 0.0;
            let mut asym: f64 = 0.0;
            for (b, h) in &ops.blocks {
                if b.is_empty() {
                    continue;
                }
                let (m, a) = symmetrized(b, h);
                let e = SymmetricEigen::new(m.clone()).eigenvalues;
                min_eig = min_eig.min(e.min());
                norm = norm.max(e.iter().fold(0.0, |acc: f64, x| acc.max(x.abs())));
                asym = asym.max(a);
            }
            let asymmetry = if norm > 0.0 { asym / norm } else { asym };
            let passed = min_eig >= -1e-10 * norm && asymmetry <= 1e-10;
            Ok(PositivityRow { k, mu, min_eigenvalue: min_eig, norm, asymmetry, passed })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    /// Index `m` of `H_m`; odd indices are compared from above, even ones from below.
    pub m: usize,
    pub mu: f64,
    pub cutoff_n: u32,
    pub lambda: f64,
    pub schur_k: f64,
    pub n_test_vectors: usize,
    /// Extreme Rayleigh ratio `<H_m psi, psi> / <(-L0) S_m psi, psi>` over the random vectors:
    /// the maximum for odd `m`, the minimum over vectors with positive denominator for even `m`.
    pub sampled_ratio: Option<f64>,
    /// The same extreme over the whole second chaos (generalized eigenvalue).
    pub exact_ratio: Option<f64>,
    /// Even `m` only: `(-L0) S_m <= 0` everywhere, so the lower bound holds for any constant.
    pub trivial: bool,
    pub finite: bool,
}

/// Compares `H_m` with `(-L0) S_m` on the second chaos for `m` in `levels`.
pub fn theorem_bound_probe(
    lattice: &Arc<ModeLattice>,
    params: &MultiplierParams,
    mu: f64,
    levels: &[usize],
    n_test_vectors: usize,
    seed: u64,
) -> Result<Vec<ProbeReport>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    levels
        .iter()
        .map(|&m| {
            let ops = SchurOperators::new(lattice, params.lambda, mu, m)?;
            let mut dens = Vec::with_capacity(ops.blocks.len());
            for (b, _) in &ops.blocks {
                let d = (0..b.len())
                    .map(|i| {
                        let x = b.l0_eigenvalue(i);
                        Ok(x * s_diag(params, m, mu, 2, x)?)
                    })
                    .collect::<Result<Vec<f64>>>()?;
                dens.push(d);
            }
            let odd = m % 2 == 1;
            let trivial = !odd && dens.iter().flatten().all(|&d| d <= 0.0);

            // generalized eigenvalues of (H, D) restricted to slots with D > 0
            let mut exact: Option<f64> = None;
            if odd || !trivial {
                for ((b, h), d) in ops.blocks.iter().zip(&dens) {
                    let idx: Vec<usize> = (0..b.len()).filter(|&i| d[i] > 0.0).collect();
                    if idx.is_empty() {
                        continue;
                    }
                    let (s, _) = symmetrized(b, h);
                    let sub = DMatrix::from_fn(idx.len(), idx.len(), |i, j| {
                        s[(idx[i], idx[j])] / (d[idx[i]] * d[idx[j]]).sqrt()
                    });
                    let e = SymmetricEigen::new(sub).eigenvalues;
                    let v = if odd { e.max() } else { e.min() };
                    exact = Some(match exact {
                        None => v,
                        Some(c) if odd => c.max(v),
                        Some(c) => c.min(v),
                    });
                }
            }

            let mut sampled: Option<f64> = None;
            for _ in 0..n_test_vectors {
                let mut num = 0.0;
                let mut den = 0.0;
                for ((b, h), d) in ops.blocks.iter().zip(&dens) {
                    let psi = DVector::from_fn(b.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
                    let hpsi = h * &psi;
                    for i in 0..b.len() {
                        let w = b.weight(i);
                        num += w * hpsi[i] * psi[i];
                        den += w * d[i] * psi[i] * psi[i];
                    }
                }
                if den > 0.0 {
                    let r = num / den;
                    sampled = Some(match sampled {
                        None => r,
                        Some(c) if odd => c.max(r),
                        Some(c) => c.min(r),
                    });
                }
            }
            let finite = sampled.is_none_or(f64::is_finite) && exact.is_none_or(f64::is_finite);
            Ok(ProbeReport {
                m,
                mu,
                cutoff_n: lattice.cutoff(),
                lambda: params.lambda,
                schur_k: params.schur_k,
                n_test_vectors,
                sampled_ratio: sampled,
                exact_ratio: exact,
                trivial,
                finite,
            })
        })
        .collect()
}
