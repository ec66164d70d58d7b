//! Deterministic random substreams.
//!
//! Every generator in the toolkit draws from a ChaCha stream keyed by the
//! run seed plus a structural path (lane, index, slot). Sibling streams are
//! independent by key construction, so generation order and worker count
//! never change the output.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// A deterministic random stream.
pub type Stream = ChaCha12Rng;

/// Lane constants keep unrelated subsystems out of each other's streams.
pub mod lanes {
    pub const SEQUENCE_GEN: u64 = 0x1111_0000_aaaa_0001;
    pub const DEMOS: u64 = 0x1111_0000_aaaa_0002;
    pub const MIXTURE_SYNTHETIC: u64 = 0x1111_0000_aaaa_0003;
    pub const MIXTURE_CODE: u64 = 0x1111_0000_aaaa_0004;
    pub const MIXTURE_ADAPTED: u64 = 0x1111_0000_aaaa_0005;
    pub const PYINDEX: u64 = 0x1111_0000_aaaa_0006;
    pub const VARIANTS: u64 = 0x1111_0000_aaaa_0007;
}

/// Derives the stream identified by `(seed, lane, index, slot)`.
///
/// The four coordinates are written verbatim into the ChaCha key, so the
/// mapping is injective: distinct paths can never collide.
pub fn substream(seed: u64, lane: u64, index: u64, slot: u64) -> Stream {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&lane.to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    key[24..32].copy_from_slice(&slot.to_le_bytes());
    ChaCha12Rng::from_seed(key)
}

/// Stable 64-bit lane id for a named condition or source tag.
pub fn lane_of(label: &str) -> u64 {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(label.as_bytes());
    u64::from_le_bytes(digest[0..8].try_into().unwrap())
}
