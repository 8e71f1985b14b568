//! Seed derivation and per-particle random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator. A run with
//! master seed `s` gives particle `i` the generator seeded from `s` with
//! stream id `i`, so two processes run with the same seed consume identical
//! per-particle randomness. Trial seeds are derived from the master seed with
//! a SplitMix64 finaliser, making trial `k` independent of how many trials or
//! threads are used.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type WalkRng = ChaCha8Rng;

/// Stream reserved for the move-order sequence of the uniform process.
pub const SCHEDULER_STREAM: u64 = 1 << 40;
/// Stream reserved for process-level clocks (continuous-time uniform runs).
pub const CLOCK_STREAM: u64 = (1 << 40) + 1;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed `index` of `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ splitmix64(index.wrapping_add(0x632b_e59b_d9b4_e019)))
}

pub fn stream(seed: u64, stream_id: u64) -> WalkRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Generator for particle `particle` (0-based) of a run seeded with `seed`.
pub fn particle_stream(seed: u64, particle: usize) -> WalkRng {
    stream(seed, particle as u64)
}
