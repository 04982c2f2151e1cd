//! Multiset bases of the homogeneous chaoses.

use std::collections::HashMap;
use std::sync::Arc;

use akpz_core::{Mode, ModeLattice};

/// Canonically sorted size-`n` multisets of lattice slots, optionally
/// restricted to a fixed total momentum.
#[derive(Clone, Debug)]
pub struct ChaosBasis {
    lattice: Arc<ModeLattice>,
    order: usize,
    sector: Option<Mode>,
    elements: Vec<Vec<u16>>,
    multiplicity: Vec<f64>,
    l0: Vec<f64>,
    index: HashMap<Vec<u16>, usize>,
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `C(m + n - 1, n)`.
pub fn multichoose(m: usize, n: usize) -> usize {
    if n == 0 {
        return 1;
    }
    let mut r: u128 = 1;
    for i in 0..n as u128 {
        r = r * (m as u128 + i) / (i + 1);
    }
    r as usize
}

impl ChaosBasis {
    /// All multisets of size `order`.
    pub fn full(lattice: Arc<ModeLattice>, order: usize) -> Self {
        Self::build(lattice, order, None)
    }

    /// Multisets of size `order` whose modes sum to `sector`.
    pub fn sector(lattice: Arc<ModeLattice>, order: usize, sector: Mode) -> Self {
        Self::build(lattice, order, Some(sector))
    }

    pub fn build(lattice: Arc<ModeLattice>, order: usize, sector: Option<Mode>) -> Self {
        assert!(lattice.len() <= u16::MAX as usize, "lattice too large for the chaos basis");
        let m = lattice.len();
        let mut elements = Vec::new();
        let mut cur: Vec<u16> = Vec::with_capacity(order);
        fn rec(
            lat: &ModeLattice,
            m: usize,
            order: usize,
            start: usize,
            sum: Mode,
            sector: Option<Mode>,
            cur: &mut Vec<u16>,
            out: &mut Vec<Vec<u16>>,
        ) {
            if cur.len() == order {
                if sector.is_none_or(|p| p == sum) {
                    out.push(cur.clone());
                }
                return;
            }
            for s in start..m {
                cur.push(s as u16);
                rec(lat, m, order, s, sum + lat.mode(s), sector, cur, out);
                cur.pop();
            }
        }
        rec(&lattice, m, order, 0, Mode::ZERO, sector, &mut cur, &mut elements);
        let nf = factorial(order);
        let multiplicity = elements
            .iter()
            .map(|e| {
                let mut denom = 1.0;
                let mut run = 1;
                for w in e.windows(2) {
                    if w[0] == w[1] {
                        run += 1;
                        denom *= run as f64;
                    } else {
                        run = 1;
                    }
                }
                nf / denom
            })
            .collect();
        let l0 = elements
            .iter()
            .map(|e| 0.5 * e.iter().map(|&s| lattice.mode(s as usize).norm2() as f64).sum::<f64>())
            .collect();
        let index = elements.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        Self { lattice, order, sector, elements, multiplicity, l0, index }
    }

    pub fn lattice(&self) -> &Arc<ModeLattice> {
        &self.lattice
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn sector_momentum(&self) -> Option<Mode> {
        self.sector
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, i: usize) -> &[u16] {
        &self.elements[i]
    }

    pub fn elements(&self) -> &[Vec<u16>] {
        &self.elements
    }

    pub fn modes(&self, i: usize) -> Vec<Mode> {
        self.elements[i].iter().map(|&s| self.lattice.mode(s as usize)).collect()
    }

    /// Number of distinct orderings of element `i`.
    pub fn multiplicity(&self, i: usize) -> f64 {
        self.multiplicity[i]
    }

    /// Inner-product weight `n! * multiplicity`.
    pub fn weight(&self, i: usize) -> f64 {
        factorial(self.order) * self.multiplicity[i]
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }

    /// `(1/2) sum |k_i|^2`, the eigenvalue of `-L0` on element `i`.
    pub fn l0_eigenvalue(&self, i: usize) -> f64 {
        self.l0[i]
    }

    pub fn l0_eigenvalues(&self) -> &[f64] {
        &self.l0
    }

    /// Index of a sorted multiset.
    pub fn find(&self, sorted: &[u16]) -> Option<usize> {
        self.index.get(sorted).copied()
    }

    pub fn momentum(&self, i: usize) -> Mode {
        self.modes(i).into_iter().fold(Mode::ZERO, |a, b| a + b)
    }

    /// Total momenta occurring in this basis, sorted.
    pub fn sectors(&self) -> Vec<Mode> {
        let mut v: Vec<Mode> = (0..self.len()).map(|i| self.momentum(i)).collect();
        v.sort();
        v.dedup();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(n: u32) -> Arc<ModeLattice> {
        Arc::new(ModeLattice::new(n).unwrap())
    }

    #[test]
    fn dimensions() {
        let l = lat(2);
        for (n, d) in [(1, 12), (2, 78), (3, 364), (4, 1365)] {
            assert_eq!(ChaosBasis::full(l.clone(), n).len(), d);
            assert_eq!(multichoose(12, n), d);
        }
        let zero: Vec<usize> = (1..=5).map(|n| ChaosBasis::sector(l.clone(), n, Mode::ZERO).len()).collect();
        assert_eq!(zero, vec![0, 6, 12, 37, 84]);
    }

    #[test]
    fn sectors_partition_the_full_basis() {
        let l = lat(2);
        let full = ChaosBasis::full(l.clone(), 3);
        let total: usize = full.sectors().iter().map(|&p| ChaosBasis::sector(l.clone(), 3, p).len()).sum();
        assert_eq!(total, full.len());
    }

    #[test]
    fn multiplicities_count_orderings() {
        let l = lat(1);
        let b = ChaosBasis::full(l.clone(), 3);
        let total: f64 = (0..b.len()).map(|i| b.multiplicity(i)).sum();
        assert_eq!(total, 64.0);
        let i = b.find(&[0, 0, 1]).unwrap();
        assert_eq!(b.multiplicity(i), 3.0);
        assert_eq!(b.weight(i), 18.0);
        assert_eq!(b.multiplicity(b.find(&[2, 2, 2]).unwrap()), 1.0);
    }

    #[test]
    fn l0_values() {
        let l = lat(2);
        let b1 = ChaosBasis::full(l.clone(), 1);
        assert_eq!(b1.l0_eigenvalue(b1.find(&[l.slot(Mode(1, 0)).unwrap() as u16]).unwrap()), 0.5);
        let b2 = ChaosBasis::full(l.clone(), 2);
        let mut e = vec![l.slot(Mode(1, 0)).unwrap() as u16, l.slot(Mode(1, 1)).unwrap() as u16];
        e.sort();
        assert_eq!(b2.l0_eigenvalue(b2.find(&e).unwrap()), 1.5);
        assert!(b2.l0_eigenvalues().iter().all(|&x| x > 0.0));
    }
}
