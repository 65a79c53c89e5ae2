//! Random streams.
//!
//! Every run owns one [`ChaCha8Rng`] stream seeded from a 64-bit integer.
//! Multi-trial experiments key trial `t` to seed `base_seed + t`, so a trial
//! draws the same numbers no matter which worker executes it.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng as StreamRng;

/// Name of the generator recorded in traces and manifests.
pub const GENERATOR_NAME: &str = "ChaCha8Rng/seed_from_u64";

pub fn stream(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}

/// Seed of trial `trial` for a base seed.
pub fn trial_seed(base_seed: u64, trial: u64) -> u64 {
    base_seed.wrapping_add(trial)
}
