//! Seed derivation and the random number generator used throughout.
//!
//! Every random draw in the toolkit comes from a [`ChaCha8Rng`] seeded by a
//! value derived from a master seed plus a path of integer coordinates, so
//! that a grid cell can be replayed in isolation and results do not depend
//! on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Sub-stream tags so that PV, CV and hold-out draws never share a stream.
pub mod stream {
    pub const DATASET: u64 = 1;
    pub const TEST_SET: u64 = 2;
    pub const PV: u64 = 3;
    pub const CV: u64 = 4;
    pub const HOLDOUT: u64 = 5;
    pub const SUBSAMPLE: u64 = 6;
    pub const TRAIN_NOISE: u64 = 7;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `master` and a coordinate path.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &c| splitmix64(acc ^ splitmix64(c.wrapping_add(0x632B_E59B_D9B4_E019))))
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
