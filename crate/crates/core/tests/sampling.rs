use std::sync::Arc;

use akpz_core::noise::{sample_white_noise, stream};
use akpz_core::nonlinearity::{Backend, Nonlinearity};
use akpz_core::observables::wick_variance_nonlinearity;
use akpz_core::stats::batch_means;
use akpz_core::{Mode, ModeLattice, Profile, TestFunction};
use num_complex::Complex64;

#[test]
fn white_noise_covariance() {
    let lat = Arc::new(ModeLattice::new(2).unwrap());
    let n = lat.len();
    let draws = 100_000;
    let mut rng = stream(2024);
    // E[eta(k) conj(eta(j))] = 1{k=j}, E[eta(k) eta(j)] = 1{k=-j}
    let mut herm = vec![Complex64::new(0.0, 0.0); n * n];
    let mut herm_sq = vec![0.0; n * n];
    let mut plain = vec![Complex64::new(0.0, 0.0); n * n];
    let mut plain_sq = vec![0.0; n * n];
    for _ in 0..draws {
        let f = sample_white_noise(&lat, &mut rng);
        for a in 0..n {
            for b in 0..n {
                let h = f.coeffs[a] * f.coeffs[b].conj();
                let p = f.coeffs[a] * f.coeffs[b];
                herm[a * n + b] += h;
                herm_sq[a * n + b] += h.norm_sqr();
                plain[a * n + b] += p;
                plain_sq[a * n + b] += p.norm_sqr();
            }
        }
    }
    let d = draws as f64;
    for a in 0..n {
        for b in 0..n {
            for (sum, sq, target) in [
                (herm[a * n + b], herm_sq[a * n + b], if a == b { 1.0 } else { 0.0 }),
                (plain[a * n + b], plain_sq[a * n + b], if b == lat.conj_index(a) { 1.0 } else { 0.0 }),
            ] {
                let mean = sum / d;
                let var = (sq / d - mean.norm_sqr()).max(1e-300);
                let se = (var / d).sqrt();
                let dev = (mean - Complex64::new(target, 0.0)).norm();
                assert!(dev < 5.0 * se, "entry ({a},{b}): mean {mean}, target {target}, se {se}");
            }
        }
    }
}

fn mc_variance(phi: &TestFunction, lambda: f64, draws: usize, seed: u64) -> (f64, f64) {
    let lat = phi.lattice().clone();
    let mut engine = Nonlinearity::new(lat.clone(), lat.cutoff(), Backend::Direct).unwrap();
    let mut rng = stream(seed);
    let mut out = vec![Complex64::new(0.0, 0.0); lat.len()];
    let mut sq = Vec::with_capacity(draws);
    for _ in 0..draws {
        let f = sample_white_noise(&lat, &mut rng);
        let n0 = engine.eval_into(&f.coeffs, &mut out);
        let mut v = n0 * phi.zero;
        for s in 0..lat.len() {
            v += (out[s] / lat.norm(s) * phi.at_neg(s)).re;
        }
        sq.push((lambda * v).powi(2));
    }
    let e = batch_means(&sq).unwrap();
    (e.value, e.stderr)
}

#[test]
fn wick_variance_matches_monte_carlo_e0() {
    let lat = Arc::new(ModeLattice::new(1).unwrap());
    let e0 = TestFunction::e0(lat);
    let (mc, se) = mc_variance(&e0, 1.0, 1_000_000, 1);
    let exact = wick_variance_nonlinearity(&e0, 1, 1.0);
    assert!((mc - exact).abs() < 3.0 * se, "mc {mc} +- {se}, wick {exact}");
    // the combinatorial factor is 2, not 1 or 4
    assert!((mc - exact / 2.0).abs() > 10.0 * se);
}

#[test]
fn wick_variance_matches_monte_carlo_general() {
    let lat = Arc::new(ModeLattice::new(2).unwrap());
    let mut phi = TestFunction::from_profile("bump", lat.clone(), Profile::Bump { radius: 1.0 }, 2.0).unwrap();
    let s = lat.slot(Mode(1, 1)).unwrap();
    phi.coeffs[s] += Complex64::new(0.0, 0.4);
    phi.coeffs[lat.conj_index(s)] += Complex64::new(0.0, -0.4);
    let (mc, se) = mc_variance(&phi, 0.7, 200_000, 2);
    let exact = wick_variance_nonlinearity(&phi, 2, 0.7);
    assert!((mc - exact).abs() < 3.0 * se, "mc {mc} +- {se}, wick {exact}");
}
