//! Deterministic seed derivation.
//!
//! Every random stream in a run descends from one master seed through
//! [`derive`], so results never depend on evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and a sequence of keys.
pub fn derive(parent: u64, keys: &[u64]) -> u64 {
    keys.iter().fold(mix64(parent), |acc, &k| mix64(acc ^ mix64(k)))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream tags so sibling streams of one parent never collide.
pub mod stream {
    pub const BITS: u64 = 0x6269_7473;
    pub const SPAN: u64 = 0x7370_616e;
    pub const POINT: u64 = 0x706f_696e;
    pub const NOISE: u64 = 0x6e6f_6973;
}
