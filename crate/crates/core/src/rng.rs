//! Seeding helpers. Every random choice in the crate flows from a `u64`
//! seed through ChaCha8, whose output stream is fixed across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a. Used where a hash must be stable across runs and builds.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for a named sub-task.
pub fn derived(seed: u64, label: &str) -> ChaCha8Rng {
    seeded(seed ^ fnv1a(label.as_bytes()))
}
