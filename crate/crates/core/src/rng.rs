//! Seeded random streams.
//!
//! Every trial owns a seed; angles and path gains are drawn from separate
//! ChaCha substreams of that seed, so changing the number of Monte Carlo
//! samples never perturbs the angle draw.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub const ANGLE_STREAM: u64 = 0;
pub const CHANNEL_STREAM: u64 = 1;

pub fn substream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seed of trial `k` under `base_seed`.
pub fn trial_seed(base_seed: u64, k: u64) -> u64 {
    base_seed.wrapping_add(k)
}
