//! Reproducible random streams.
//!
//! Everything random in the crate is drawn from ChaCha8, a counter-based
//! generator whose output is identical across platforms. Independent trials
//! use the same key with distinct stream ids, so trial `i` of a run seeded
//! with `s` is always the same sequence regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// Name of the Gaussian sampler, recorded in experiment metadata.
pub const GAUSSIAN_METHOD: &str = "rand_distr::StandardNormal (ziggurat) over ChaCha8";

pub fn seeded(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for trial `index` of the family keyed by `base_seed`.
pub fn trial_rng(base_seed: u64, index: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(index);
    rng
}
