//! Seeded, labelled random streams.
//!
//! Every consumer of randomness asks for a stream by `(seed, label)`. The
//! stream key is a SHA-256 digest of both, so two labels never share a
//! stream and a fold evaluated on any thread draws the same numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

/// The generator type used throughout the crate.
pub type StreamRng = ChaCha20Rng;

/// Returns the deterministic stream identified by `seed` and `label`.
pub fn seeded_rng(seed: u64, label: &str) -> StreamRng {
    let mut hasher = Sha256::new();
    hasher.update(b"bullyscope-rng-v1");
    hasher.update(seed.to_le_bytes());
    hasher.update((label.len() as u64).to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha20Rng::from_seed(key)
}
