//! Labeled seed derivation.
//!
//! Every random decision in the pipeline draws from a generator derived from
//! the single root seed and a stage label, so one `--seed` flag controls the
//! whole run and stages stay independent of each other's draw counts.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derive a 32-byte sub-seed from the root seed and a stage label.
fn derive_bytes(root: u64, label: &str) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(root.to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.finalize().into()
}

/// Derive a sub-seed for stages that key their own counter-based generators.
pub fn derive_seed(root: u64, label: &str) -> u64 {
    let bytes = derive_bytes(root, label);
    u64::from_le_bytes(bytes[..8].try_into().unwrap())
}

/// Derive a stream RNG for a pipeline stage.
pub fn derive_rng(root: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(derive_bytes(root, label))
}

/// Stateless counter-based generator: a splitmix64 chain over the key tuple.
///
/// Returns a uniform draw in `[0, 2^64)` that depends only on the inputs,
/// so callers may evaluate positions in any order (or in parallel) and get
/// identical results.
pub fn counter_hash(seed: u64, ordinal: u64, position: u64, stream: u64) -> u64 {
    let mut h = splitmix64(seed);
    h = splitmix64(h ^ ordinal);
    h = splitmix64(h ^ position);
    splitmix64(h ^ stream)
}

/// Map a counter draw onto the unit interval `[0, 1)`.
pub fn counter_unit(seed: u64, ordinal: u64, position: u64, stream: u64) -> f64 {
    // 53 random bits, the full f64 mantissa.
    let bits = counter_hash(seed, ordinal, position, stream) >> 11;
    bits as f64 / (1u64 << 53) as f64
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
