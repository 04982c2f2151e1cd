use akpz_core::noise::trajectory_seed;
use akpz_core::{SimConfig, TestFunction};
use akpz_harness::ensemble::{run_ensemble, seeds};
use akpz_harness::experiments::lattice;
use proptest::prelude::*;

fn last_b(master: u64, n: u64, jobs: usize) -> Vec<(u64, f64)> {
    let phi = TestFunction::e0(lattice(2).unwrap());
    let cfg = SimConfig::new(2, 1.0, 0.05, 0.5);
    run_ensemble(&cfg, std::slice::from_ref(&phi), master, n, Some(jobs), |tr| {
        Ok((tr.config.seed, *tr.b_series("e0")?.last().unwrap()))
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn results_do_not_depend_on_thread_count(master in any::<u64>(), n in 1u64..20, jobs in 2usize..6) {
        let a = last_b(master, n, 1);
        let b = last_b(master, n, jobs);
        prop_assert_eq!(a.iter().map(|x| x.1.to_bits()).collect::<Vec<_>>(), b.iter().map(|x| x.1.to_bits()).collect::<Vec<_>>());
        prop_assert_eq!(a.iter().map(|x| x.0).collect::<Vec<_>>(), seeds(master, n));
    }

    #[test]
    fn seeds_are_distinct(master in any::<u64>()) {
        let mut s = seeds(master, 200);
        prop_assert_eq!(s[3], trajectory_seed(master, 3));
        s.sort_unstable();
        s.dedup();
        prop_assert_eq!(s.len(), 200);
    }
}
