use std::sync::Arc;

use akpz_chaos::hierarchy::Hierarchy;
use akpz_chaos::operator::{build_aminus, build_aplus};
use akpz_chaos::vector::weighted_inner;
use akpz_chaos::ChaosBasis;
use akpz_core::observables::wick_variance_nonlinearity;
use akpz_core::test_function::Profile;
use akpz_core::{Mode, ModeLattice, TestFunction};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn lat(n: u32) -> Arc<ModeLattice> {
    Arc::new(ModeLattice::new(n).unwrap())
}

fn random(rng: &mut ChaCha8Rng, d: usize) -> Vec<Complex64> {
    (0..d).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect()
}

#[test]
fn aplus_is_minus_adjoint_of_aminus() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n_cut in [1, 2] {
        let l = lat(n_cut);
        for n in 1..=3 {
            let src = ChaosBasis::full(l.clone(), n);
            let dst = ChaosBasis::full(l.clone(), n + 1);
            let ap = build_aplus(&src, &dst, 0.7);
            let am = build_aminus(&dst, &src, 0.7);
            for _ in 0..50 {
                let f = random(&mut rng, src.len());
                let g = random(&mut rng, dst.len());
                let lhs = weighted_inner(&dst, &ap.apply(&f), &g);
                let rhs = -weighted_inner(&src, &f, &am.apply(&g));
                let scale = weighted_inner(&src, &f, &f).re.sqrt() * weighted_inner(&dst, &g, &g).re.sqrt();
                assert!((lhs - rhs).norm() <= 1e-10 * scale.max(lhs.norm()), "N={n_cut} n={n}: {lhs} vs {rhs}");
            }
        }
    }
}

#[test]
fn aplus_is_nonzero_at_n2() {
    let l = lat(2);
    for n in 1..=3 {
        let ap = build_aplus(&ChaosBasis::full(l.clone(), n), &ChaosBasis::full(l.clone(), n + 1), 1.0);
        assert!(ap.nnz() > 0);
    }
}

#[test]
fn n1_generator_couplings_vanish() {
    let l = lat(1);
    for n in 1..=4 {
        let src = ChaosBasis::full(l.clone(), n);
        let dst = ChaosBasis::full(l.clone(), n + 1);
        assert_eq!(build_aplus(&src, &dst, 1.0).nnz(), 0);
        assert_eq!(build_aminus(&dst, &src, 1.0).nnz(), 0);
    }
}

#[test]
fn n_phi_norm_matches_wick_variance() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n_cut in [1u32, 2] {
        let l = lat(n_cut);
        let mut phis = vec![TestFunction::e0(l.clone())];
        phis.push(TestFunction::from_profile("bump", l.clone(), Profile::Bump { radius: 1.0 }, n_cut as f64).unwrap());
        let mut coeffs = vec![Complex64::new(0.0, 0.0); l.len()];
        for s in l.representatives() {
            let c = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            coeffs[s] = c;
            coeffs[l.conj_index(s)] = c.conj();
        }
        phis.push(TestFunction::new("random", l.clone(), coeffs, 0.3).unwrap());
        for phi in &phis {
            for lambda in [0.5, 1.0] {
                let h = Hierarchy::new(phi, lambda, 2).unwrap();
                let wick = wick_variance_nonlinearity(phi, n_cut, lambda);
                assert!(wick > 0.0, "{} at N={n_cut}", phi.id);
                let fock = h.n_phi_norm2();
                assert!((fock - wick).abs() <= 1e-10 * wick, "{}: {fock} vs {wick}", phi.id);
                // the same statement for the kernel itself: 2! ||n_phi||^2_{L^2} = variance
                let b2 = ChaosBasis::full(l.clone(), 2);
                let c = akpz_chaos::hierarchy::n_phi_coeffs(phi, lambda, &b2).unwrap();
                let l2: f64 = (0..b2.len()).map(|i| b2.multiplicity(i) * c[i].norm_sqr()).sum();
                assert!((2.0 * l2 - wick).abs() <= 1e-10 * wick);
            }
        }
    }
}

#[test]
fn n_phi_for_e0_at_n1() {
    let l = lat(1);
    let b = ChaosBasis::full(l.clone(), 2);
    let c = akpz_chaos::hierarchy::n_phi_coeffs(&TestFunction::e0(l.clone()), 0.5, &b).unwrap();
    let s = |k: Mode| l.slot(k).unwrap() as u16;
    let expect = 0.5 / (2.0 * std::f64::consts::PI);
    for (i, e) in b.elements().iter().enumerate() {
        let m = b.momentum(i);
        if m == Mode::ZERO {
            let sign = if e.contains(&s(Mode(1, 0))) { 1.0 } else { -1.0 };
            assert!((c[i].re - sign * expect).abs() < 1e-15 && c[i].im == 0.0);
        } else {
            assert_eq!(c[i], Complex64::new(0.0, 0.0));
        }
    }
}

#[test]
fn summary_checks_agree_with_the_detailed_ones() {
    for n_cut in [1, 2] {
        let l = lat(n_cut);
        assert!(akpz_chaos::calibration::adjointness_defect(&l, 0.7, 3, 10, 1) <= 1e-10);
        let d = akpz_chaos::calibration::wick_defect(&TestFunction::e0(l), 1.0).unwrap();
        assert!(d <= 1e-10, "{d}");
    }
}
