//! Deterministic seed derivation.
//!
//! Every random stream in a run is derived from the user's seeds plus a
//! fixed tag path, so that adding or removing one consumer never shifts
//! the stream seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `base` and a path of tags.
pub fn derive(base: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(mix(base), |acc, &t| mix(acc ^ mix(t)))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// Tags used across modules.
pub(crate) const TAG_DESIGN: u64 = 0x01;
pub(crate) const TAG_FIT: u64 = 0x02;
pub(crate) const TAG_ACQ: u64 = 0x03;
pub(crate) const TAG_QUERY: u64 = 0x04;
pub(crate) const TAG_RANDOM: u64 = 0x05;
pub(crate) const TAG_NOISE: u64 = 0x06;
