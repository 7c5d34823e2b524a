//! Child seeds for independent realizations.
//!
//! `seed_stream(master, id)` is the `(id + 1)`-th output of a SplitMix64
//! generator started at `master`: the state advances by the odd constant
//! `0x9E3779B97F4A7C15` per stream and is passed through the SplitMix64
//! finalizer. Both steps are bijections of `u64`, so distinct ids under one
//! master never collide. Only wrapping integer arithmetic is involved, so the
//! mapping is identical on every platform.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn seed_stream(master_seed: u64, realization_id: u64) -> u64 {
    mix64(master_seed.wrapping_add(realization_id.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Seeds for the separate random ingredients of one realization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RealizationSeeds {
    pub disorder: u64,
    pub initial_state: u64,
}

impl RealizationSeeds {
    pub fn derive(master_seed: u64, realization_id: u64) -> Self {
        let base = seed_stream(master_seed, realization_id);
        Self {
            disorder: seed_stream(base, 0),
            initial_state: seed_stream(base, 1),
        }
    }
}
