//! SHA-256 under single-byte domain tags, with counter-mode expansion.

use sha2::{Digest, Sha256};

pub const TAG_H1: u8 = 0x01;
pub const TAG_H2: u8 = 0x02;
pub const TAG_KDF: u8 = 0x03;
pub const TAG_KEYSTREAM: u8 = 0x04;
pub const TAG_SETUP: u8 = 0x10;
pub const TAG_PAIRING_AUX: u8 = 0x11;
pub const TAG_SIM: u8 = 0x20;

pub const BLOCK_LEN: usize = 32;

/// One block: `SHA-256(tag ∥ parts… ∥ counter_be32)`.
pub fn block(tag: u8, parts: &[&[u8]], counter: u32) -> [u8; BLOCK_LEN] {
    let mut h = Sha256::new();
    h.update([tag]);
    for p in parts {
        h.update(p);
    }
    h.update(counter.to_be_bytes());
    h.finalize().into()
}

/// Concatenated blocks for counters 0, 1, … truncated to `len` bytes.
pub fn expand(tag: u8, parts: &[&[u8]], len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(len + BLOCK_LEN);
    let mut counter = 0u32;
    while out.len() < len {
        out.extend_from_slice(&block(tag, parts, counter));
        counter += 1;
    }
    out.truncate(len);
    out
}

/// Length-prefixed encoding so multi-part hash inputs stay unambiguous.
pub fn lp(bytes: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(bytes.len() + 4);
    out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
    out.extend_from_slice(bytes);
    out
}
