//! Deterministic seed derivation.
//!
//! Every source of randomness in a run draws from one global seed through a
//! named sub-stream, so that e.g. changing the training shuffle cannot
//! perturb scene generation.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Derives the seed of the sub-stream `name[index]` from a global seed.
pub fn sub_seed(global: u64, name: &str, index: u64) -> u64 {
    let mut h = splitmix64(global ^ 0x6c62_272e_07bb_0142);
    for &b in name.as_bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    splitmix64(h ^ index)
}

/// A ChaCha RNG seeded on the sub-stream `name[index]`.
pub fn sub_rng(global: u64, name: &str, index: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(sub_seed(global, name, index))
}
