//! Deterministic seed derivation.
//!
//! Stages and sub-tasks derive their own seeds from the master seed and a
//! textual label, so any stage can be rerun in isolation and still produce
//! the same stream it would have seen in a full run.

use sha2::{Digest, Sha256};

/// Derive a child seed from `master` and a namespacing label.
pub fn derive(master: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}
