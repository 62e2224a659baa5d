//! Deterministic per-task seeds, independent of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for task `(stream, item)` under a global seed.
pub fn derive_seed(global: u64, stream: u64, item: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(global) ^ stream) ^ item)
}

pub fn rng_for(global: u64, stream: u64, item: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(global, stream, item))
}
