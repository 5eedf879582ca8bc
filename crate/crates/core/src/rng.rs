//! Seed derivation and complex Gaussian sampling.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// The generator used for every random draw in the crate.
pub type SimRng = ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable hash of a seed path; independent of platform and std hasher changes.
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x5EED_0A1C_C0DE_u64, |acc, &p| mix64(acc ^ mix64(p)))
}

pub fn rng_from(parts: &[u64]) -> SimRng {
    SimRng::seed_from_u64(derive_seed(parts))
}

/// Independent random streams within one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Dataset = 1,
    Privacy = 2,
    Adversaries = 3,
    Pattern = 4,
    AttackNoise = 5,
    Precision = 6,
    Subsample = 7,
}

pub fn stream(trial_seed: u64, s: Stream) -> SimRng {
    rng_from(&[trial_seed, s as u64])
}

/// One draw from the circularly-symmetric complex Gaussian `CN(mean, variance)`:
/// real and imaginary parts each carry `variance / 2`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, mean: Complex64, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    mean + Complex64::new(re * s, im * s)
}
