//! Bit-level primitives: fixed-capacity bit vectors, hash derivation, the
//! checksum family used by the extended codec, and the canonical enumeration
//! of near-miss hash modifications.
//!
//! Repo-wide bit conventions (every module relies on these):
//!
//! - Bit index 0 is the rightmost (least significant) bit of a [`BitVec`].
//! - Packing into bytes is most-significant-bit first, zero-padded on the
//!   right to a byte boundary.
//! - A hash "prefix" of `h` bits means the first `h` bits of the digest's
//!   leading bytes, most-significant-first.

mod bitvec;
mod checksum;
mod hash;
mod modify;

pub use bitvec::{hamming_distance, BitVec, MAX_BITS};
pub use checksum::{checksum, ChecksumKind, ChecksumSpec};
pub use hash::{derive_hash, prf_hash_stream, HashAlgorithm, HashSpec, PrfHashStream};
pub use modify::{enumerate_modifications, FlipPatterns, Modifications};

pub(crate) use checksum::checksum_value;
pub(crate) use hash::prefix_u64;
