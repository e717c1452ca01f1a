//! Stable seed derivation shared by the generators and the scheduler.

use sha2::{Digest, Sha256};

/// Derives a 64-bit seed from a base seed and a list of labelled parts.
/// Stable across platforms and releases (SHA-256, little-endian prefix).
pub fn derive_seed(base: u64, parts: &[&[u8]]) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    for part in parts {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part);
    }
    let digest = h.finalize();
    let mut buf = [0u8; 8];
    buf.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(buf)
}

/// Hex SHA-256 of arbitrary bytes.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
