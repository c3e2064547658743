//! Named RNG sub-streams.
//!
//! Every source of randomness in the crate is derived from a single global
//! seed through [`substream`]. The split function is SHA-256 over
//! `seed || label || index`, so sub-streams are independent, replayable, and
//! stable across platforms. Labels in use include `"instance"`, `"sampler"`,
//! `"saa-batch"`, `"saa-select"`, `"saa-final"`, `"sam"`, and `"tsm"`.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derive a named sub-stream from a global seed.
pub fn substream(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.update(index.to_le_bytes());
    let digest: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(digest)
}

/// Derive a child seed (rather than a generator) from a global seed.
///
/// Used where an API takes a seed, e.g. to give every evaluated seed set its
/// own deterministic SAA stream.
pub fn child_seed(seed: u64, label: &str, index: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}
