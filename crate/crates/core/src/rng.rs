//! Deterministic RNG streams. Every stochastic routine in the crate derives
//! its randomness from `stream(seed, domain, index)`, so results are
//! reproducible regardless of thread count or evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Stream domains, so independent subsystems never share a stream.
pub mod domain {
    pub const INIT: u64 = 1;
    pub const DATA: u64 = 2;
    pub const TRAIN: u64 = 3;
    pub const NOISE_LEVEL: u64 = 4;
    pub const SAMPLER: u64 = 5;
    pub const EVAL: u64 = 6;
    pub const PROBE: u64 = 7;
}

/// Independent ChaCha stream keyed by (seed, domain, index).
pub fn stream(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ domain.wrapping_mul(0x9E3779B97F4A7C15));
    rng.set_stream(index);
    rng
}

/// Stream keyed by a noise level, used where levels come from a grid rather
/// than an indexed schedule.
pub fn sigma_stream(seed: u64, sigma: f64, index: u64) -> ChaCha8Rng {
    stream(seed ^ sigma.to_bits(), domain::NOISE_LEVEL, index)
}

pub fn normal_vec<R: rand::Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}
