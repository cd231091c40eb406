//! Seed derivation for reproducible, order-independent parallel trials.
//!
//! Every random quantity in an experiment is drawn from a generator whose
//! seed is a pure function of the master seed and a path of integer keys
//! (cell, trial, purpose). Trials can therefore run in any order or in
//! parallel and still produce identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sub-stream purposes inside a single trial.
pub mod purpose {
    pub const NETWORK: u64 = 1;
    pub const TRAIN_STREAM: u64 = 2;
    pub const TEST_STREAM: u64 = 3;
    pub const TRAIN_NOISE: u64 = 4;
    pub const REPLAY_NOISE: u64 = 5;
    pub const TEST_NOISE: u64 = 6;
    pub const FAULT: u64 = 7;
    pub const AUX_STREAM: u64 = 8;
    pub const RETRAIN_NOISE: u64 = 9;
    pub const POST_TEST_STREAM: u64 = 10;
    pub const POST_TEST_NOISE: u64 = 11;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a key.
pub fn derive_seed(parent: u64, key: u64) -> u64 {
    splitmix64(splitmix64(parent) ^ splitmix64(key.wrapping_mul(0xd6e8_feb8_6659_fd93)))
}

/// Derive a seed along a path of keys.
pub fn derive_path(parent: u64, keys: &[u64]) -> u64 {
    keys.iter().fold(parent, |seed, &key| derive_seed(seed, key))
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
