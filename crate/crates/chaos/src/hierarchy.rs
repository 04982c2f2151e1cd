//! Truncated resolvent equation on the chaos hierarchy.
//!
//! The generator preserves total momentum, so every solve splits into
//! independent momentum sectors. Within a sector the block-tridiagonal
//! system over orders `1..=n` is reduced by Schur complements from the top
//! order down to order 2.

use std::collections::BTreeMap;
use std::sync::Arc;

use akpz_core::kernel::kernel_unchecked;
use akpz_core::{Mode, ModeLattice, TestFunction};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::basis::ChaosBasis;
use crate::error::{ChaosError, Result};
use crate::operator::{build_aminus, build_aplus};
use crate::vector::{weighted_inner, ChaosVector, FockSpace};

/// Relative tolerance for solver residuals and sandwich ordering.
pub const SOLVER_TOL: f64 = 1e-10;

/// Order-2 coefficients `lambda K_{l,m} phi_hat(-l-m)` on a multiset basis.
pub fn n_phi_coeffs(phi: &TestFunction, lambda: f64, basis: &ChaosBasis) -> Result<Vec<Complex64>> {
    if basis.order() != 2 {
        return Err(ChaosError::Shape(format!("n_phi lives in order 2, got basis of order {}", basis.order())));
    }
    if phi.lattice().cutoff() != basis.lattice().cutoff() {
        return Err(akpz_core::Error::LatticeMismatch { field: basis.lattice().cutoff(), requested: phi.lattice().cutoff() }.into());
    }
    let lat = basis.lattice();
    let cutoff = lat.cutoff();
    Ok(basis
        .elements()
        .iter()
        .map(|e| {
            let (l, m) = (lat.mode(e[0] as usize), lat.mode(e[1] as usize));
            let kv = kernel_unchecked(l, m, cutoff);
            if kv == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let phi_neg = match lat.slot(l + m) {
                Some(s) => phi.at_neg(s),
                None => Complex64::new(phi.zero, 0.0),
            };
            phi_neg * (lambda * kv)
        })
        .collect())
}

/// `n_phi` as a vector on the full Fock space of the given truncation.
pub fn n_phi_vector(phi: &TestFunction, lambda: f64, space: &FockSpace) -> Result<ChaosVector> {
    let mut v = space.zeros();
    if space.n_max() >= 2 {
        v.orders[2] = n_phi_coeffs(phi, lambda, space.level(2))?;
    }
    Ok(v)
}

/// Operator blocks of one momentum sector, orders `1..=n_max`.
#[derive(Clone, Debug)]
pub struct SectorBlocks {
    pub momentum: Mode,
    pub space: FockSpace,
    /// `aplus[j]`: order `j -> j + 1`.
    pub aplus: Vec<DMatrix<f64>>,
    /// `aminus[j]`: order `j -> j - 1`.
    pub aminus: Vec<DMatrix<f64>>,
    /// Order-2 right-hand side.
    pub rhs: Vec<Complex64>,
}

impl SectorBlocks {
    pub fn new(lattice: Arc<ModeLattice>, momentum: Mode, n_max: usize, lambda: f64, rhs: Vec<Complex64>) -> Self {
        let space = FockSpace::new(lattice, n_max, Some(momentum));
        let mut aplus = vec![DMatrix::zeros(0, 0); n_max + 1];
        let mut aminus = vec![DMatrix::zeros(0, 0); n_max + 1];
        for j in 1..n_max {
            aplus[j] = build_aplus(space.level(j), space.level(j + 1), lambda).to_dense();
            aminus[j + 1] = build_aminus(space.level(j + 1), space.level(j), lambda).to_dense();
        }
        Self { momentum, space, aplus, aminus, rhs }
    }

    pub fn n_max(&self) -> usize {
        self.space.n_max()
    }

    fn diag(&self, j: usize, mu: f64) -> DVector<f64> {
        DVector::from_iterator(self.space.level(j).len(), self.space.level(j).l0_eigenvalues().iter().map(|x| mu + x))
    }

    fn rhs_matrix(&self) -> DMatrix<f64> {
        let d = self.rhs.len();
        DMatrix::from_fn(d, 2, |i, c| if c == 0 { self.rhs[i].re } else { self.rhs[i].im })
    }

    /// Schur complement on order `from` of the truncation at order `n`, for `2 <= from <= n`:
    /// `S_n = D_n`, `S_j = D_j - A-_{j+1} S_{j+1}^{-1} A+_j`.
    pub fn schur(&self, mu: f64, n: usize, from: usize) -> Result<DMatrix<f64>> {
        let mut s = DMatrix::from_diagonal(&self.diag(n, mu));
        for j in (from..n).rev() {
            s = schur_step(DMatrix::from_diagonal(&self.diag(j, mu)), &self.aminus[j + 1], &s, &self.aplus[j])?;
        }
        Ok(s)
    }

    /// Operator on order 2 induced by orders above 2 in the truncation at `n`.
    pub fn h_operator(&self, mu: f64, n: usize) -> Result<DMatrix<f64>> {
        let d2 = DMatrix::from_diagonal(&self.diag(2, mu));
        Ok(self.schur(mu, n, 2)? - d2)
    }

    /// Solves `(mu - L_n) h = n_phi` by Schur reduction; returns the per-order solution.
    pub fn solve(&self, mu: f64, n: usize) -> Result<Vec<DMatrix<f64>>> {
        check_truncation(n, self.n_max())?;
        let mut schurs = vec![DMatrix::zeros(0, 0); n + 1];
        schurs[n] = DMatrix::from_diagonal(&self.diag(n, mu));
        for j in (2..n).rev() {
            schurs[j] =
                schur_step(DMatrix::from_diagonal(&self.diag(j, mu)), &self.aminus[j + 1], &schurs[j + 1], &self.aplus[j])?;
        }
        let d1 = self.diag(1, mu);
        let mut t2 = schurs[2].clone();
        if !d1.is_empty() {
            let scaled = DMatrix::from_fn(d1.len(), self.aminus[2].ncols(), |i, c| self.aminus[2][(i, c)] / d1[i]);
            t2 -= &self.aplus[1] * scaled;
        }
        let mut h = vec![DMatrix::zeros(0, 2); n + 1];
        h[2] = lu_solve(&t2, &self.rhs_matrix())?;
        let a1 = &self.aminus[2] * &h[2];
        h[1] = DMatrix::from_fn(d1.len(), 2, |i, c| a1[(i, c)] / d1[i]);
        for j in 3..=n {
            h[j] = lu_solve(&schurs[j], &(&self.aplus[j - 1] * &h[j - 1]))?;
        }
        Ok(h)
    }

    /// `(mu - L_n) h` restricted to orders `1..=n`.
    pub fn apply_resolvent_operator(&self, mu: f64, n: usize, h: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
        (0..=n)
            .map(|j| {
                if j == 0 {
                    return DMatrix::zeros(0, 2);
                }
                let mut r = DMatrix::from_diagonal(&self.diag(j, mu)) * &h[j];
                if j > 1 {
                    r -= &self.aplus[j - 1] * &h[j - 1];
                }
                if j < n {
                    r -= &self.aminus[j + 1] * &h[j + 1];
                }
                r
            })
            .collect()
    }

    /// Relative residual of a solution in the weighted norm.
    pub fn residual(&self, mu: f64, n: usize, h: &[DMatrix<f64>]) -> f64 {
        let r = self.apply_resolvent_operator(mu, n, h);
        let b = self.rhs_matrix();
        let mut num = 0.0;
        for (j, rj) in r.iter().enumerate().skip(1) {
            let basis = self.space.level(j);
            for i in 0..basis.len() {
                let want = if j == 2 { [b[(i, 0)], b[(i, 1)]] } else { [0.0, 0.0] };
                num += basis.weight(i) * ((rj[(i, 0)] - want[0]).powi(2) + (rj[(i, 1)] - want[1]).powi(2));
            }
        }
        let den = weighted_norm2(self.space.level(2), &self.rhs);
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }

    /// Dense solve of the full block system, used as an oracle.
    pub fn dense_solve(&self, mu: f64, n: usize) -> Result<Vec<DMatrix<f64>>> {
        check_truncation(n, self.n_max())?;
        let mut offs = vec![0usize; n + 2];
        for j in 1..=n {
            offs[j + 1] = offs[j] + self.space.level(j).len();
        }
        let dim = offs[n + 1];
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        for j in 1..=n {
            let d = self.diag(j, mu);
            for i in 0..d.len() {
                m[(offs[j] + i, offs[j] + i)] = d[i];
            }
            if j > 1 {
                let a = &self.aplus[j - 1];
                m.view_mut((offs[j], offs[j - 1]), a.shape()).copy_from(&(-a));
            }
            if j < n {
                let a = &self.aminus[j + 1];
                m.view_mut((offs[j], offs[j + 1]), a.shape()).copy_from(&(-a));
            }
        }
        let mut b = DMatrix::zeros(dim, 2);
        b.view_mut((offs[2], 0), (self.rhs.len(), 2)).copy_from(&self.rhs_matrix());
        let x = lu_solve(&m, &b)?;
        Ok((0..=n)
            .map(|j| if j == 0 { DMatrix::zeros(0, 2) } else { x.rows(offs[j], offs[j + 1] - offs[j]).into_owned() })
            .collect())
    }

    /// `<n_phi, h_2>` in the weighted inner product.
    pub fn value_of(&self, h2: &DMatrix<f64>) -> Complex64 {
        let h: Vec<Complex64> = (0..h2.nrows()).map(|i| Complex64::new(h2[(i, 0)], h2[(i, 1)])).collect();
        weighted_inner(self.space.level(2), &self.rhs, &h)
    }
}

fn check_truncation(n: usize, n_max: usize) -> Result<()> {
    if n < 2 || n > n_max {
        return Err(ChaosError::Truncation(n));
    }
    Ok(())
}

fn weighted_norm2(basis: &ChaosBasis, v: &[Complex64]) -> f64 {
    weighted_inner(basis, v, v).re
}

fn schur_step(d: DMatrix<f64>, am: &DMatrix<f64>, s_next: &DMatrix<f64>, ap: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if s_next.nrows() == 0 {
        return Ok(d);
    }
    let x = lu_solve(s_next, ap)?;
    Ok(d - am * x)
}

fn lu_solve(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.nrows() == 0 {
        return Ok(DMatrix::zeros(0, b.ncols()));
    }
    let x = a.clone().lu().solve(b).ok_or(ChaosError::Solver { residual: f64::INFINITY })?;
    let r = (a * &x - b).norm();
    let scale = b.norm().max(f64::MIN_POSITIVE);
    if !(r <= 1e-8 * scale) {
        return Err(ChaosError::Solver { residual: r / scale });
    }
    Ok(x)
}

/// Truncated hierarchy for one test function, split by momentum sector.
#[derive(Clone, Debug)]
pub struct Hierarchy {
    lattice: Arc<ModeLattice>,
    lambda: f64,
    n_max: usize,
    sectors: Vec<SectorBlocks>,
    n_phi_norm2: f64,
}

/// Result of one truncated solve.
#[derive(Clone, Debug)]
pub struct Solution {
    pub mu: f64,
    pub n: usize,
    pub value: f64,
    /// Relative weighted residual of the block system.
    pub residual: f64,
    /// Per-sector solutions, orders `0..=n` with two columns (real, imaginary).
    pub h: Vec<(Mode, Vec<DMatrix<f64>>)>,
}

impl Hierarchy {
    pub fn new(phi: &TestFunction, lambda: f64, n_max: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(ChaosError::Truncation(n_max));
        }
        let lattice = phi.lattice().clone();
        let full2 = ChaosBasis::full(lattice.clone(), 2);
        let coeffs = n_phi_coeffs(phi, lambda, &full2)?;
        let n_phi_norm2 = weighted_norm2(&full2, &coeffs);
        let mut by_sector: BTreeMap<Mode, ()> = BTreeMap::new();
        for (i, c) in coeffs.iter().enumerate() {
            if c.norm_sqr() > 0.0 {
                by_sector.insert(full2.momentum(i), ());
            }
        }
        let sectors = by_sector
            .into_keys()
            .map(|p| {
                let b2 = ChaosBasis::sector(lattice.clone(), 2, p);
                let rhs = n_phi_coeffs(phi, lambda, &b2)?;
                Ok(SectorBlocks::new(lattice.clone(), p, n_max, lambda, rhs))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { lattice, lambda, n_max, sectors, n_phi_norm2 })
    }

    pub fn lattice(&self) -> &Arc<ModeLattice> {
        &self.lattice
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn sectors(&self) -> &[SectorBlocks] {
        &self.sectors
    }

    /// `||n_phi||^2` in the Fock inner product, i.e. `2!` times the squared `L^2` norm
    /// of the kernel; this is the variance of `lambda N[eta](phi)`.
    pub fn n_phi_norm2(&self) -> f64 {
        self.n_phi_norm2
    }

    pub fn solve(&self, mu: f64, n: usize) -> Result<Solution> {
        self.solve_with(mu, n, false)
    }

    pub fn dense_solve(&self, mu: f64, n: usize) -> Result<Solution> {
        self.solve_with(mu, n, true)
    }

    fn solve_with(&self, mu: f64, n: usize, dense: bool) -> Result<Solution> {
        if !(mu > 0.0) {
            return Err(ChaosError::NonPositiveMu(mu));
        }
        check_truncation(n, self.n_max)?;
        let mut value = Complex64::new(0.0, 0.0);
        let mut res2 = 0.0;
        let mut h = Vec::with_capacity(self.sectors.len());
        for sec in &self.sectors {
            let hs = if dense { sec.dense_solve(mu, n)? } else { sec.solve(mu, n)? };
            let w = weighted_norm2(sec.space.level(2), &sec.rhs);
            res2 += sec.residual(mu, n, &hs).powi(2) * w;
            value += sec.value_of(&hs[2]);
            h.push((sec.momentum, hs));
        }
        let residual = if self.n_phi_norm2 > 0.0 { (res2 / self.n_phi_norm2).sqrt() } else { res2.sqrt() };
        if residual > 1e-9 {
            return Err(ChaosError::Solver { residual });
        }
        Ok(Solution { mu, n, value: value.re, residual, h })
    }

    /// Values for every truncation in `n_list`, with the ordering checked.
    pub fn sandwich(&self, mu: f64, n_list: &[usize]) -> Result<Sandwich> {
        let values = n_list
            .iter()
            .map(|&n| Ok((n, self.solve(mu, n)?.value)))
            .collect::<Result<Vec<_>>>()?;
        Sandwich::from_values(mu, values)
    }
}

/// Ordered bound sequence: odd truncations from below, even from above.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Sandwich {
    pub mu: f64,
    pub values: Vec<(usize, f64)>,
    pub lower: f64,
    pub upper: f64,
}

impl Sandwich {
    pub fn from_values(mu: f64, mut values: Vec<(usize, f64)>) -> Result<Self> {
        values.sort_by_key(|v| v.0);
        let scale = values.iter().map(|v| v.1.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let tol = 1e-9 * scale;
        let odd: Vec<_> = values.iter().filter(|v| v.0 % 2 == 1).copied().collect();
        let even: Vec<_> = values.iter().filter(|v| v.0 % 2 == 0).copied().collect();
        for w in odd.windows(2) {
            if w[1].1 < w[0].1 - tol {
                return Err(ChaosError::SandwichViolation {
                    n: w[1].0,
                    detail: format!("odd values decrease: v{} = {} > v{} = {}", w[0].0, w[0].1, w[1].0, w[1].1),
                });
            }
        }
        for w in even.windows(2) {
            if w[1].1 > w[0].1 + tol {
                return Err(ChaosError::SandwichViolation {
                    n: w[1].0,
                    detail: format!("even values increase: v{} = {} < v{} = {}", w[0].0, w[0].1, w[1].0, w[1].1),
                });
            }
        }
        let lower = odd.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
        let upper = even.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        if lower > upper + tol {
            return Err(ChaosError::SandwichViolation {
                n: odd.last().map_or(0, |v| v.0),
                detail: format!("lower bound {lower} exceeds upper bound {upper}"),
            });
        }
        Ok(Self { mu, values, lower, upper })
    }

    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }

    /// CSV rows `mu,n,value,side`.
    pub fn csv_rows(&self) -> Vec<String> {
        self.values
            .iter()
            .map(|&(n, v)| format!("{:e},{},{:e},{}", self.mu, n, v, if n % 2 == 1 { "lower" } else { "upper" }))
            .collect()
    }
}

/// Values of the truncated resolvent over a grid of `mu`.
pub fn bounds_table(h: &Hierarchy, mus: &[f64], n_list: &[usize]) -> Result<Vec<Sandwich>> {
    mus.iter().map(|&mu| h.sandwich(mu, n_list)).collect()
}
