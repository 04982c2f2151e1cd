use std::sync::Arc;

use akpz_core::noise::{sample_white_noise, stream, trajectory_seed};
use akpz_core::observables::wick_variance_nonlinearity;
use akpz_core::sim::{simulate, Increments, SimConfig, Stepper};
use akpz_core::stats::batch_means;
use akpz_core::{Backend, ModeLattice, TestFunction};
use num_complex::Complex64;

/// Time-averaged `|u(k)|^2` over `t in [t0, T]` per trajectory; checks each mode.
fn stationarity(lambda: f64, n_traj: u64, dt: f64, t_final: f64, tol_se: f64) {
    let mut cfg = SimConfig::new(2, lambda, dt, t_final);
    cfg.keep_snapshots = true;
    cfg.record_stride = 2;
    cfg.backend = Backend::Direct;
    let n_modes = ModeLattice::new(2).unwrap().len();
    let mut per_mode = vec![Vec::new(); n_modes];
    for i in 0..n_traj {
        cfg.seed = trajectory_seed(77, i);
        let tr = simulate(&cfg, &[]).unwrap();
        let keep: Vec<_> = tr.times.iter().zip(&tr.snapshots).filter(|(t, _)| **t >= 1.0).map(|(_, f)| f).collect();
        for (s, acc) in per_mode.iter_mut().enumerate() {
            acc.push(keep.iter().map(|f| f.coeffs[s].norm_sqr()).sum::<f64>() / keep.len() as f64);
        }
    }
    for (s, v) in per_mode.iter().enumerate() {
        let e = batch_means(v).unwrap();
        assert!((e.value - 1.0).abs() < tol_se * e.stderr, "lambda {lambda}, slot {s}: {} +- {}", e.value, e.stderr);
    }
}

#[test]
fn linear_dynamics_preserves_white_noise() {
    stationarity(0.0, 100, 0.05, 5.0, 4.0);
}

#[test]
fn nonlinear_dynamics_preserves_white_noise() {
    stationarity(1.0, 100, 0.02, 10.0, 4.0);
}

#[test]
fn nonlinearity_integral_is_centred() {
    let lat = Arc::new(ModeLattice::new(2).unwrap());
    let e0 = TestFunction::e0(lat);
    let mut cfg = SimConfig::new(2, 1.0, 0.02, 1.0);
    cfg.backend = Backend::Direct;
    let mut vals = Vec::new();
    for i in 0..2000 {
        cfg.seed = trajectory_seed(5, i);
        let tr = simulate(&cfg, std::slice::from_ref(&e0)).unwrap();
        vals.push(*tr.b_series("e0").unwrap().last().unwrap());
    }
    let e = batch_means(&vals).unwrap();
    assert!(e.value.abs() < 3.0 * e.stderr, "{} +- {}", e.value, e.stderr);
}

#[test]
fn small_time_growth_matches_wick_variance() {
    let lat = Arc::new(ModeLattice::new(2).unwrap());
    let e0 = TestFunction::e0(lat);
    let lambda = 1.0;
    let t = 0.004;
    let mut cfg = SimConfig::new(2, lambda, 0.0005, t);
    cfg.backend = Backend::Direct;
    let mut vals = Vec::new();
    for i in 0..40_000 {
        cfg.seed = trajectory_seed(9, i);
        let tr = simulate(&cfg, std::slice::from_ref(&e0)).unwrap();
        let b = *tr.b_series("e0").unwrap().last().unwrap();
        vals.push(b * b / (t * t));
    }
    let e = batch_means(&vals).unwrap();
    let wick = wick_variance_nonlinearity(&e0, 2, lambda);
    assert!((e.value - wick).abs() < 3.0 * e.stderr + 0.01 * wick, "{} +- {} vs {wick}", e.value, e.stderr);
}

/// Combine the increments of two consecutive fine steps of length `h` into one of length `2h`.
fn coarsen(lat: &ModeLattice, h: f64, a: &Increments, b: &Increments) -> Increments {
    let mut out = a.clone();
    for s in 0..lat.len() {
        let decay = (-0.5 * lat.norm(s).powi(2) * h).exp();
        out.ou[s] = a.ou[s] * decay + b.ou[s];
        out.db[s] = a.db[s] + b.db[s];
    }
    out.db0 = a.db0 + b.db0;
    out
}

#[test]
fn strong_error_is_first_order() {
    let lat = Arc::new(ModeLattice::new(2).unwrap());
    let t_final = 0.64;
    let finest = 0.00125;
    let levels = [0.04, 0.02, 0.01];
    let mut errors = vec![0.0; levels.len()];
    for seed in 0..20 {
        let mut rng = stream(1000 + seed);
        let init = sample_white_noise(&lat, &mut rng);
        let fine_cfg = SimConfig::new(2, 1.0, finest, t_final);
        let mut fine = Stepper::new(&fine_cfg, init.clone()).unwrap();
        let n_fine = fine_cfg.n_steps() as usize;
        let zero = Complex64::new(0.0, 0.0);
        let mut incs = Vec::with_capacity(n_fine);
        for _ in 0..n_fine {
            let mut inc = Increments { ou: vec![zero; lat.len()], db: vec![zero; lat.len()], db0: 0.0 };
            fine.sample_increments(&mut rng, &mut inc);
            fine.step_with(&inc).unwrap();
            incs.push(inc);
        }
        let reference = fine.velocity().to_vec();
        let mut h = finest;
        let mut cur = incs;
        let mut by_dt = Vec::new();
        while h < 0.04 - 1e-12 {
            cur = cur.chunks(2).map(|p| coarsen(&lat, h, &p[0], &p[1])).collect();
            h *= 2.0;
            by_dt.push((h, cur.clone()));
        }
        for (li, &dt) in levels.iter().enumerate() {
            let (_, path) = by_dt.iter().find(|(h, _)| (h - dt).abs() < 1e-12).unwrap();
            let mut st = Stepper::new(&SimConfig::new(2, 1.0, dt, t_final), init.clone()).unwrap();
            for inc in path {
                st.step_with(inc).unwrap();
            }
            let err: f64 = st.velocity().iter().zip(&reference).map(|(a, b)| (a - b).norm_sqr()).sum();
            errors[li] += err.sqrt();
        }
    }
    assert!(errors[1] / errors[0] < 0.7, "{errors:?}");
    assert!(errors[2] / errors[1] < 0.7, "{errors:?}");
}

#[test]
fn backends_give_the_same_trajectory() {
    let lat = Arc::new(ModeLattice::new(4).unwrap());
    let e0 = TestFunction::e0(lat);
    let mut cfg = SimConfig::new(4, 1.0, 0.01, 0.5);
    cfg.seed = 3;
    cfg.backend = Backend::Direct;
    let a = simulate(&cfg, std::slice::from_ref(&e0)).unwrap();
    cfg.backend = Backend::Fft;
    let b = simulate(&cfg, std::slice::from_ref(&e0)).unwrap();
    let (ba, bb) = (a.b_series("e0").unwrap(), b.b_series("e0").unwrap());
    for (x, y) in ba.iter().zip(bb) {
        assert!((x - y).abs() < 1e-9 * (1.0 + x.abs()));
    }
}
