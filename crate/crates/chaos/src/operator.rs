//! Generator blocks between chaos levels in multiset coordinates.
//!
//! A vector on a [`ChaosBasis`] stores the value of a symmetric kernel on
//! each multiset. With the weights `n! * multiplicity` the blocks below
//! satisfy `<A+ f, g> = -<f, A- g>`.

use std::collections::BTreeMap;

use akpz_core::kernel::kernel_unchecked;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::basis::ChaosBasis;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    pub source_order: usize,
    pub target_order: usize,
    n_cols: usize,
    rows: Vec<Vec<(u32, f64)>>,
}

impl SparseOperator {
    fn from_rows(source_order: usize, target_order: usize, n_cols: usize, rows: Vec<BTreeMap<u32, f64>>) -> Self {
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().filter(|&(_, v)| v != 0.0).collect())
            .collect();
        Self { source_order, target_order, n_cols, rows }
    }

    pub fn diagonal(order: usize, diag: &[f64]) -> Self {
        let rows = diag.iter().enumerate().map(|(i, &v)| vec![(i as u32, v)]).collect();
        Self { source_order: order, target_order: order, n_cols: diag.len(), rows }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    /// `(row, col, value)` triplets.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&(j, v)| (i, j as usize, v)))
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n_cols);
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(j, v)| x[j as usize] * v).sum())
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_rows(), self.n_cols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }
}

/// `-L0` on a chaos level: diagonal `(1/2) sum |k_i|^2`.
pub fn build_l0(basis: &ChaosBasis) -> SparseOperator {
    SparseOperator::diagonal(basis.order(), basis.l0_eigenvalues())
}

fn sorted_with(rest: impl Iterator<Item = u16>, extra: &[u16]) -> Vec<u16> {
    let mut v: Vec<u16> = rest.chain(extra.iter().copied()).collect();
    v.sort_unstable();
    v
}

/// Creation part, order `n -> n + 1`:
/// `(A+ f)(q_1..q_{n+1}) = (2 lambda / (n+1)) sum_{i<j} |q_i+q_j| K_{q_i,q_j} f(q_i+q_j, q_rest)`.
pub fn build_aplus(source: &ChaosBasis, target: &ChaosBasis, lambda: f64) -> SparseOperator {
    let n = source.order();
    assert_eq!(target.order(), n + 1);
    let lat = source.lattice();
    let cutoff = lat.cutoff();
    let pref = 2.0 * lambda / (n + 1) as f64;
    let mut rows = vec![BTreeMap::new(); target.len()];
    if lambda != 0.0 {
        for (r, row) in rows.iter_mut().enumerate() {
            let q = target.element(r);
            for i in 0..q.len() {
                for j in i + 1..q.len() {
                    let (a, b) = (lat.mode(q[i] as usize), lat.mode(q[j] as usize));
                    let kv = kernel_unchecked(a, b, cutoff);
                    // a zero sum feeds the zero mode only and carries the factor |q_i + q_j| = 0
                    let Some(s) = lat.slot(a + b).filter(|_| kv != 0.0) else {
                        continue;
                    };
                    let rest = q.iter().enumerate().filter(|&(t, _)| t != i && t != j).map(|(_, &x)| x);
                    let key = sorted_with(rest, &[s as u16]);
                    if let Some(c) = source.find(&key) {
                        *row.entry(c as u32).or_insert(0.0) += pref * lat.norm(s) * kv;
                    }
                }
            }
        }
    }
    SparseOperator::from_rows(n, n + 1, source.len(), rows)
}

/// Annihilation part, order `n -> n - 1`:
/// `(A- f)(p_1..p_{n-1}) = 2 lambda n sum_i sum_l |l+p_i| K_{l,p_i} f(l+p_i, -l, p_rest)`.
pub fn build_aminus(source: &ChaosBasis, target: &ChaosBasis, lambda: f64) -> SparseOperator {
    let n = source.order();
    assert!(n >= 1 && target.order() == n - 1);
    let lat = source.lattice();
    let cutoff = lat.cutoff();
    let pref = 2.0 * lambda * n as f64;
    let mut rows = vec![BTreeMap::new(); target.len()];
    if lambda != 0.0 {
        for (r, row) in rows.iter_mut().enumerate() {
            let p = target.element(r);
            for i in 0..p.len() {
                let pi = lat.mode(p[i] as usize);
                for (sl, &l) in lat.modes().iter().enumerate() {
                    let kv = kernel_unchecked(l, pi, cutoff);
                    let Some(sm) = lat.slot(l + pi).filter(|_| kv != 0.0) else {
                        continue;
                    };
                    let sneg = lat.conj_index(sl);
                    let rest = p.iter().enumerate().filter(|&(t, _)| t != i).map(|(_, &x)| x);
                    let key = sorted_with(rest, &[sm as u16, sneg as u16]);
                    if let Some(c) = source.find(&key) {
                        *row.entry(c as u32).or_insert(0.0) += pref * lat.norm(sm) * kv;
                    }
                }
            }
        }
    }
    SparseOperator::from_rows(n, n - 1, source.len(), rows)
}
