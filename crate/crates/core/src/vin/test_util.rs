//! Shared fixtures for the scorer's unit tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::features::{FeatureBundle, PooledGrid, CHANNELS};
use crate::vin::params::VinProfile;

/// A synthetic bundle with ~60% occupied cells and plausible value ranges.
pub(crate) fn random_bundle(profile: &VinProfile, seed: u64) -> FeatureBundle {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let res = profile.pooled_res;
    let n = res as usize * res as usize * CHANNELS;
    let mut f_p = vec![0.0f32; n];
    let mut f_v = vec![0.0f32; n];
    let cells = res as usize * res as usize;
    for cell in 0..cells {
        if rng.gen_bool(0.6) {
            for c in 0..CHANNELS {
                let i = cell * CHANNELS + c;
                f_p[i] = match c {
                    0..=2 => rng.gen_range(-1.0..1.0),
                    3 => rng.gen_range(0.0..8.0f32).floor(),
                    _ => rng.gen_range(1.0..30.0),
                };
                f_v[i] = rng.gen_range(0.0..0.5);
            }
        }
    }
    let total = u64::from(profile.grid_res) * u64::from(profile.grid_res);
    let inside = rng.gen_range(0..total / 4);
    let outside = rng.gen_range(0..total / 2);
    FeatureBundle {
        f_p: PooledGrid { res, data: f_p },
        f_v: PooledGrid { res, data: f_v },
        f_empty: (inside, outside),
        f_base: rng.gen_range(2..10),
        grid_res: profile.grid_res,
    }
}
