//! Seed expansion.
//!
//! Every random stream in a run is derived from one global seed: stream `k` of seed
//! `s` is seeded with `derive_seed(s, k)`, a SplitMix64 hash of the pair. Nested
//! streams (experiment cell, repetition, chain) are derived by chaining calls.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    mix(mix(seed.wrapping_add(GOLDEN)) ^ stream.wrapping_add(1).wrapping_mul(GOLDEN))
}
