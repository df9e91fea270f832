//! Seeded randomness.
//!
//! Every random draw in the crate comes from [`ChaCha8Rng`], seeded through
//! `SeedableRng::seed_from_u64`. Its output stream is value-stable across
//! platforms and releases of `rand_chacha`, so a seed reproduces the same
//! graphs and optimizer starts everywhere. Sub-seeds are derived with the
//! SplitMix64 finalizer so that related streams (per cell, per restart) are
//! decorrelated without sharing generator state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 output function.
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Folds a sequence of words into one seed. Order-sensitive.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix64(base), |acc, &p| mix64(acc ^ mix64(p)))
}
