//! Seed derivation. Every random stream is a ChaCha8 generator whose seed is
//! a SplitMix64 hash of `(base seed, purpose, index)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Name recorded in outputs next to every seed.
pub const GENERATOR: &str = "chacha8";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Reward = 1,
    Algorithm = 2,
    Instance = 3,
    Repetition = 4,
}

pub(crate) fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed. SplitMix64 is a bijection, so for a fixed `purpose`
/// the map `index -> seed` is injective for each `base`.
pub fn derive(base: u64, purpose: Purpose, index: u64) -> u64 {
    splitmix(splitmix(base ^ ((purpose as u64) << 56)).wrapping_add(index))
}

pub fn stream(base: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(base, purpose, index))
}
