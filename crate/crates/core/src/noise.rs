use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::field::SpectralField;
use crate::lattice::ModeLattice;

/// Random stream used for every trajectory.
pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of trajectory `index` under `master` (splitmix64 finalizer over both words).
pub fn trajectory_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `(g1 + i g2) / sqrt(2)` with independent standard normals.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    Complex64::new(a * FRAC_1_SQRT_2, b * FRAC_1_SQRT_2)
}

/// Spatial white noise projected on the lattice: `E[eta(k) eta(j)] = 1{k+j=0}`.
/// One complex Gaussian per conjugate pair, representatives in slot order.
pub fn sample_white_noise<R: Rng + ?Sized>(lattice: &Arc<ModeLattice>, rng: &mut R) -> SpectralField {
    let mut f = SpectralField::zeros(lattice.clone());
    for s in lattice.representatives() {
        let z = complex_gaussian(rng);
        f.coeffs[s] = z;
        f.coeffs[lattice.conj_index(s)] = z.conj();
    }
    f
}
