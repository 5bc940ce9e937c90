//! Deterministic seed derivation.
//!
//! Every random draw in the crate comes from a ChaCha8 generator seeded with
//! `derive_sample_seed(master, stream_label, sample_index)`. The mix is:
//!
//! ```text
//! splitmix64(z) = {
//!     z += 0x9E3779B97F4A7C15
//!     z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!     z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!     z ^ (z >> 31)
//! }                                  (all arithmetic wrapping mod 2^64)
//! label_hash = FNV-1a 64 over the UTF-8 bytes of stream_label
//! seed = splitmix64(splitmix64(splitmix64(master) ^ label_hash) ^ sample_index)
//! ```
//!
//! Work items own their seed, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// One step of the SplitMix64 generator applied to `z`.
pub fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

pub fn derive_sample_seed(master_seed: u64, stream_label: &str, sample_index: u64) -> u64 {
    let keyed = splitmix64(master_seed) ^ fnv1a64(stream_label.as_bytes());
    splitmix64(splitmix64(keyed) ^ sample_index)
}

/// Generator for one work item.
pub fn sample_rng(master_seed: u64, stream_label: &str, sample_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_sample_seed(master_seed, stream_label, sample_index))
}
