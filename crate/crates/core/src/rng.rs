//! Seeding. Every random draw in the crate comes from ChaCha8 seeded through
//! these two functions; the generator identity is part of the
//! reproducibility contract, so changing it changes every experiment output.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of sub-task `index` under `master`: the first word of ChaCha8 stream
/// `index` keyed by `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}
