//! Deterministic random streams.
//!
//! Every random decision in the toolkit (run order, Latin-hypercube
//! permutations, Monte-Carlo points, simulated noise) is drawn from a
//! ChaCha8 stream. Child seeds are derived with [`mix`], the SplitMix64
//! finalizer applied to `seed + golden_gamma * (index + 1)`, so a run's seed
//! can be recomputed from the master seed and its run id alone.
//!
//! Integer draws go through `u64` so the streams are identical on 32-bit and
//! 64-bit targets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The generator type used throughout the crate.
pub type Stream = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Derives a child seed from `seed` and an index (run id, simulation index, ...).
pub fn mix(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Opens a stream for a 64-bit seed.
pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform index in `0..=upper`.
pub fn index_inclusive(rng: &mut Stream, upper: usize) -> usize {
    rng.random_range(0..=upper as u64) as usize
}

/// Uniform real in `[0, 1)`.
pub fn unit(rng: &mut Stream) -> f64 {
    // 53 random mantissa bits
    (rng.random::<u64>() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// In-place Fisher–Yates shuffle.
pub fn shuffle<T>(items: &mut [T], rng: &mut Stream) {
    for i in (1..items.len()).rev() {
        let j = index_inclusive(rng, i);
        items.swap(i, j);
    }
}

/// A uniformly random permutation of `0..n`.
pub fn permutation(n: usize, rng: &mut Stream) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    shuffle(&mut p, rng);
    p
}

/// Standard normal draw.
pub fn standard_normal(rng: &mut Stream) -> f64 {
    rng.sample(rand_distr::StandardNormal)
}
