//! Hashing helpers shared by seeding, archives and lockfiles.

use blake2::{Blake2b512, Digest as _};
use sha2::Sha256;

/// First 8 bytes of the 64-byte blake2b digest.
pub fn blake2b_8(parts: &[&[u8]]) -> [u8; 8] {
    let mut h = Blake2b512::new();
    for p in parts {
        h.update(p);
    }
    let full = h.finalize();
    let mut out = [0u8; 8];
    out.copy_from_slice(&full[..8]);
    out
}

pub fn blake2b_8_hex(parts: &[&[u8]]) -> String {
    hex(&blake2b_8(parts))
}

/// Little-endian `u64` from `blake2b_8`.
pub fn blake2b_u64(parts: &[&[u8]]) -> u64 {
    u64::from_le_bytes(blake2b_8(parts))
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex(&Sha256::digest(data))
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
