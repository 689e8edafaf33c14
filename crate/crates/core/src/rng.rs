//! Seeded random streams.
//!
//! A single 64-bit master seed fixes an experiment.  Independent branches
//! (Monte Carlo trials, optimizer starts, verification batches) draw from
//! ChaCha streams selected by a counter, so the values seen by branch `i`
//! never depend on how many threads ran the other branches.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// The root stream of an experiment.
pub fn master(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream number `index` derived from `seed`.
pub fn stream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Stream `index` inside a named family, so unrelated uses of the same seed
/// do not collide.
pub fn substream(seed: u64, family: u64, index: u64) -> Stream {
    stream(mix(seed ^ mix(family.wrapping_add(0x9e37_79b9_7f4a_7c15))), index)
}

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
