//! Seed-stream derivation.
//!
//! Every randomized routine in this crate receives a `u64` seed and derives
//! independent child streams from it with [`stream_rng`]. Because a stream is
//! a pure function of `(seed, path)`, results do not depend on evaluation
//! order or worker count, and replicates can be drawn in parallel.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Labels for the independent stream families used across the crate.
/// Keeping them in one place guarantees two call sites never collide.
pub mod tag {
    pub const GP_PATH: u64 = 0x01;
    pub const NOISE: u64 = 0x02;
    pub const PREDICTOR: u64 = 0x03;
    pub const DESIGN_MATRIX: u64 = 0x04;
    pub const BOOT_REPLICATE: u64 = 0x05;
    pub const TAU_QUANTILE: u64 = 0x06;
    pub const TAU_FRESH: u64 = 0x07;
    pub const FINAL_BOOT: u64 = 0x08;
    pub const TAU_SELECT: u64 = 0x09;
    pub const STUDY_REPLICATE: u64 = 0x0a;
}

/// SplitMix64 finalizer; full-avalanche mixing of a 64-bit word.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `master` and a path of indices.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut state = mix(master ^ 0x6c62_272e_07bb_0142);
    for &idx in path {
        state = mix(state ^ mix(idx));
    }
    state
}

/// A deterministic RNG for the stream identified by `(master, path)`.
pub fn stream_rng(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}
