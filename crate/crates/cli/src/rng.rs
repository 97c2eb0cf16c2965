//! Seed derivation for experiments.
//!
//! Every random stream is a `ChaCha8Rng` seeded with a 64-bit value derived
//! from the master seed by SplitMix64 finalisation:
//!
//! - sensing matrix of trial `t`: `mix(mix(seed ^ PHI_TAG) ^ t)`
//! - signal of trial `t` at sparsity `k`: `mix(mix(mix(seed ^ SIGNAL_TAG) ^ k) ^ t)`
//!
//! Trial `t` therefore sees the same matrix at every `k`, and no stream depends
//! on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PHI_TAG: u64 = 0x5048_495f_4d41_5458;
const SIGNAL_TAG: u64 = 0x5349_474e_414c_5f58;

/// SplitMix64 finaliser.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn matrix_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(mix(seed ^ PHI_TAG) ^ trial))
}

pub fn signal_rng(seed: u64, k: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(mix(mix(seed ^ SIGNAL_TAG) ^ k) ^ trial))
}
