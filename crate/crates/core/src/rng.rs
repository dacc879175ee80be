//! Seedable, splittable randomness.
//!
//! Every random decision in the engine comes from a ChaCha8 stream derived
//! from a user-supplied seed. Each clause owns its own stream, so feedback to
//! distinct clauses consumes independent randomness and serial and parallel
//! execution produce bit-identical results. Stream 0 is reserved for
//! harness-level draws (target values, document sampling, shuffles); clause
//! `j` uses stream `j + 1`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream id reserved for harness-level draws.
const HARNESS_STREAM: u64 = 0;

/// RNG stream for harness-level draws under `seed`.
pub fn harness_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(HARNESS_STREAM);
    rng
}

/// Independent RNG stream for one clause under `seed`.
pub fn clause_rng(seed: u64, clause: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(clause as u64 + 1);
    rng
}

/// Derives a decorrelated child seed from `(seed, salt)`.
///
/// SplitMix64 finalizer; used to give sweep cells and per-class models
/// independent seeds without user bookkeeping.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
