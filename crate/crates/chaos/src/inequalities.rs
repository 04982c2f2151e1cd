//! Comparison of squared momenta after splitting one momentum in two.

use akpz_core::Mode;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct LmReport {
    pub checked: usize,
    pub violations: usize,
    /// Smallest value of `middle / lower` and of `upper / middle` seen.
    pub min_lower_margin: f64,
    pub min_upper_margin: f64,
    pub passed: bool,
}

/// For `l + m = k_1` with `m != 0`, checks
/// `(|l|^2 + |k_{1:n}|^2) / 4 <= |l|^2 + |m|^2 + |k_{2:n}|^2 <= 4 (|l|^2 + |k_{1:n}|^2)`.
///
/// `l` and `k_1` range over all nonzero integer vectors with entries bounded
/// by `bound`; each pair is combined with `tails` random tails of length 0..=2.
pub fn lm_inequality_check(bound: i32, tails: usize, seed: u64) -> LmReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vecs: Vec<Mode> = (-bound..=bound)
        .flat_map(|a| (-bound..=bound).map(move |b| Mode(a, b)))
        .filter(|k| !k.is_zero())
        .collect();
    let mut rep = LmReport {
        checked: 0,
        violations: 0,
        min_lower_margin: f64::INFINITY,
        min_upper_margin: f64::INFINITY,
        passed: true,
    };
    for &l in &vecs {
        for &k1 in &vecs {
            let m = k1 - l;
            if m.is_zero() {
                continue;
            }
            for t in 0..tails {
                let len = if t == 0 { 0 } else { rng.random_range(1..=2) };
                let tail: i64 = (0..len)
                    .map(|_| {
                        let k = Mode(rng.random_range(-bound..=bound), rng.random_range(-bound..=bound));
                        k.norm2()
                    })
                    .sum();
                let base = (l.norm2() + k1.norm2() + tail) as f64;
                let middle = (l.norm2() + m.norm2() + tail) as f64;
                let lower = base / 4.0;
                let upper = 4.0 * base;
                rep.checked += 1;
                if !(lower <= middle && middle <= upper) {
                    rep.violations += 1;
                }
                rep.min_lower_margin = rep.min_lower_margin.min(middle / lower);
                rep.min_upper_margin = rep.min_upper_margin.min(upper / middle);
            }
        }
    }
    rep.passed = rep.violations == 0;
    rep
}
