//! Deterministic stream-keyed randomness.
//!
//! Every random decision in this crate is a pure function of a user seed, a
//! stream tag, and an index (edge id, sample id, vertex id, trial id).
//! Nothing ever touches OS entropy, so any run is reproducible bit-for-bit on
//! any platform, and work split across workers draws the same values as a
//! single-worker run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags keep independent uses of the same seed decorrelated.
pub mod stream {
    pub const EDGE_WEIGHT: u64 = 0xE1;
    pub const SAMPLE: u64 = 0x5A;
    pub const PARTITION: u64 = 0x9A;
    pub const TRIAL: u64 = 0x7D;
    pub const LT_THRESHOLD: u64 = 0x17;
    pub const SCHEDULER: u64 = 0xC5;
    pub const SUBSEED: u64 = 0x55;
}

/// splitmix64 step: add the golden-ratio increment, then finalize.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Collapse (seed, stream, index) into one well-mixed 64-bit key.
pub fn mix3(seed: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index)
}

/// A fresh generator for one (seed, stream, index) cell.
pub fn keyed_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix3(seed, stream, index))
}

/// Derive an independent sub-seed, used by the CLI to fan a master seed out
/// into weight/sampling/partition/scheduler seeds.
pub fn derive_seed(master: u64, which: u64) -> u64 {
    mix3(master, stream::SUBSEED, which)
}
