use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Maximum number of bits a [`BitVec`] can hold.
pub const MAX_BITS: usize = 512;

const WORDS: usize = MAX_BITS / 64;

/// A fixed-capacity vector of 1..=512 bits with value semantics.
///
/// Bit index 0 is the rightmost (least significant) bit; the `Display` form
/// prints most-significant-first, so `"10110"` has bit 0 = `0` and bit 4 =
/// `1`. Storage is inline, so the type is `Copy` and cheap to pass around in
/// hot loops.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: u16,
    words: [u64; WORDS],
}

impl BitVec {
    /// All-zero vector of the given length.
    pub fn zeros(len: usize) -> Result<Self> {
        if len == 0 || len > MAX_BITS {
            return Err(Error::BitVecLength(len));
        }
        Ok(Self {
            len: len as u16,
            words: [0; WORDS],
        })
    }

    /// Build from the low `len` bits of `value` (bit 0 = least significant).
    pub fn from_u64(value: u64, len: usize) -> Result<Self> {
        let mut v = Self::zeros(len)?;
        v.words[0] = if len >= 64 {
            value
        } else {
            value & ((1u64 << len) - 1)
        };
        Ok(v)
    }

    /// Take the first `len` bits of `bytes`, most-significant-bit first.
    ///
    /// The first bit of the stream becomes the *most* significant bit of the
    /// vector, matching the "digest prefix" convention.
    pub fn from_bytes_msb(bytes: &[u8], len: usize) -> Result<Self> {
        if bytes.len() * 8 < len {
            return Err(Error::BitVecLength(len));
        }
        let mut v = Self::zeros(len)?;
        for k in 0..len {
            let bit = (bytes[k / 8] >> (7 - k % 8)) & 1;
            if bit != 0 {
                v.set(len - 1 - k, true);
            }
        }
        Ok(v)
    }

    /// Pack most-significant-bit first into bytes, zero-padded on the right
    /// to a byte boundary.
    pub fn to_bytes_msb(&self) -> Vec<u8> {
        let len = self.len();
        let mut out = vec![0u8; len.div_ceil(8)];
        for k in 0..len {
            if self.get(len - 1 - k) {
                out[k / 8] |= 0x80 >> (k % 8);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        false // length is always >= 1
    }

    /// Read bit `index`. Panics if `index >= len`.
    pub fn get(&self, index: usize) -> bool {
        assert!(
            index < self.len(),
            "bit index {index} out of range for length {}",
            self.len
        );
        (self.words[index / 64] >> (index % 64)) & 1 != 0
    }

    /// Write bit `index`. Panics if `index >= len`.
    pub fn set(&mut self, index: usize, value: bool) {
        assert!(
            index < self.len(),
            "bit index {index} out of range for length {}",
            self.len
        );
        let mask = 1u64 << (index % 64);
        if value {
            self.words[index / 64] |= mask;
        } else {
            self.words[index / 64] &= !mask;
        }
    }

    /// Flip bit `index`. Panics if `index >= len`.
    pub fn flip(&mut self, index: usize) {
        assert!(
            index < self.len(),
            "bit index {index} out of range for length {}",
            self.len
        );
        self.words[index / 64] ^= 1u64 << (index % 64);
    }

    /// Number of one bits.
    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Value of the vector as an integer. Panics if `len > 64`.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len() <= 64, "BitVec of {} bits exceeds u64", self.len);
        self.words[0]
    }

    /// The leftmost (most significant) `n` bits as a new vector.
    pub fn high_bits(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.len() {
            return Err(Error::BitVecLength(n));
        }
        let mut out = Self::zeros(n)?;
        let base = self.len() - n;
        for i in 0..n {
            if self.get(base + i) {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    /// The rightmost (least significant) `n` bits as a new vector.
    pub fn low_bits(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.len() {
            return Err(Error::BitVecLength(n));
        }
        let mut out = Self::zeros(n)?;
        for i in 0..n {
            if self.get(i) {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    /// `self` followed by `right`: `self` becomes the leftmost bits.
    pub fn concat(&self, right: &Self) -> Result<Self> {
        let total = self.len() + right.len();
        let mut out = Self::zeros(total)?;
        for i in 0..right.len() {
            if right.get(i) {
                out.set(i, true);
            }
        }
        for i in 0..self.len() {
            if self.get(i) {
                out.set(right.len() + i, true);
            }
        }
        Ok(out)
    }

    pub(crate) fn xor_words(&self, other: &Self) -> u32 {
        self.words
            .iter()
            .zip(other.words.iter())
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }
}

/// Number of positions where `a` and `b` differ.
pub fn hamming_distance(a: &BitVec, b: &BitVec) -> Result<u32> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    Ok(a.xor_words(b))
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.len()).rev() {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl FromStr for BitVec {
    type Err = Error;

    /// Parse a most-significant-first string of `0`/`1` digits.
    fn from_str(s: &str) -> Result<Self> {
        let mut v = Self::zeros(s.len())?;
        for (k, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => v.set(s.len() - 1 - k, true),
                _ => return Err(Error::MalformedTrace(format!("bad bit digit {ch:?}"))),
            }
        }
        Ok(v)
    }
}

impl serde::Serialize for BitVec {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for BitVec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(de)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}
