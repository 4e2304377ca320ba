//! Seed derivation. This is part of the output contract: golden CSV files
//! depend on it bit for bit.
//!
//! `mix64` is the SplitMix64 finaliser. A seed is derived by folding words
//! into a running state: `h = mix64(base ^ GOLDEN)`, then for each word `w`
//! `h = mix64(h ^ (w + GOLDEN))` (wrapping arithmetic), where `GOLDEN` is
//! `0x9E3779B97F4A7C15`.

use crate::allocator::Variant;

pub const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive(base: u64, words: &[u64]) -> u64 {
    words.iter().fold(mix64(base ^ GOLDEN), |h, &w| {
        mix64(h ^ w.wrapping_add(GOLDEN))
    })
}

/// Domain tags keep the derived streams apart.
const TAG_SCENARIO: u64 = 1;
const TAG_CHANNEL: u64 = 2;
const TAG_ALGORITHM: u64 = 3;

/// Seed of the topology of one drop. Shared by every variant and rate point.
pub fn topology_seed(base: u64, n_users: usize, drop_index: usize) -> u64 {
    derive(base, &[TAG_SCENARIO, n_users as u64, drop_index as u64])
}

/// Seed of the fading draw of one drop. Shared by every variant and rate point.
pub fn channel_seed(base: u64, n_users: usize, drop_index: usize) -> u64 {
    derive(base, &[TAG_CHANNEL, n_users as u64, drop_index as u64])
}

/// Seed handed to the grouping algorithm (k-means restarts, random labels).
pub fn algorithm_seed(base: u64, variant: Variant, n_users: usize, drop_index: usize) -> u64 {
    derive(
        base,
        &[
            TAG_ALGORITHM,
            variant.code(),
            n_users as u64,
            drop_index as u64,
        ],
    )
}
