use akpz_mct::*;
use proptest::prelude::*;

fn synthetic(delta: f64, c: f64) -> MctGrid {
    let q: Vec<f64> = (0..5).map(|j| 1e-6 * 10f64.powf(j as f64 / 2.0)).collect();
    let t: Vec<f64> = std::iter::once(0.0).chain((0..400).map(|i| 10f64.powf(-1.0 + 7.5 * i as f64 / 399.0))).collect();
    MctGrid::synthetic(q, t, |t, _| if t > 1.0 { c * t * t.ln().powf(delta) } else { 0.0 })
}

#[test]
fn recovers_synthetic_exponents() {
    for (delta, c) in [(0.5, 0.3), (0.33, 0.3)] {
        let f = fit_delta(&synthetic(delta, c), &FitWindow::default()).unwrap();
        assert!((f.delta - delta).abs() < 0.01, "{}", f.delta);
        assert!((f.c - c).abs() < 1e-3);
        assert!(f.delta_band.1 - f.delta_band.0 < 1e-6);
    }
}

#[test]
fn short_grid_is_rejected() {
    let q = vec![1e-6];
    let t: Vec<f64> = (0..50).map(|i| 1.0 + i as f64).collect();
    let g = MctGrid::synthetic(q, t, |t, _| t);
    assert!(matches!(fit_delta(&g, &FitWindow::default()), Err(MctError::ShortGrid { .. })));
}

#[test]
fn evolved_exponent_and_matching() {
    for kernel in [MemoryKernel::Approximated, MemoryKernel::Full] {
        let mut cfg = MctConfig::new(1.0);
        cfg.kernel = kernel;
        let g = evolve_s(&cfg).unwrap();
        let w = FitWindow::default();
        let f = fit_delta(&g, &w).unwrap();
        assert!((0.4..=0.6).contains(&f.delta), "{kernel:?}: {}", f.delta);
        let r = |d: f64| consistency_residual(d, &g, &w).unwrap();
        assert!(r(0.5) < r(0.3) && r(0.5) < r(0.7));
        for i in 0..=30 {
            assert!(r(0.2 + 0.02 * i as f64).is_finite());
        }
        let fine = fit_delta(&evolve_s(&cfg.refined()).unwrap(), &w).unwrap();
        assert!((fine.delta - f.delta).abs() < 0.02);
    }
}

#[test]
fn no_coupling_no_residual() {
    let g = evolve_s(&MctConfig::new(0.0)).unwrap();
    assert_eq!(consistency_residual(0.5, &g, &FitWindow::default()).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn synthetic_recovery(delta in 0.2f64..0.8, c in 0.05f64..3.0) {
        let f = fit_delta(&synthetic(delta, c), &FitWindow::default()).unwrap();
        prop_assert!((f.delta - delta).abs() < 1e-4);
    }

    #[test]
    fn positivity_for_any_coupling(lambda in 0.0f64..3.0, gamma in 0.0f64..2.0) {
        let mut cfg = MctConfig::new(lambda);
        cfg.normalization = Normalization::Reduced { gamma };
        cfg.t_final = 100.0;
        cfg.q_per_decade = 8;
        let g = evolve_s(&cfg).unwrap();
        for i in 1..g.t.len() {
            for j in 0..g.q.len() {
                prop_assert!(g.s(i, j) >= 0.0 && g.s(i, j) <= g.s(i - 1, j));
            }
        }
    }
}
