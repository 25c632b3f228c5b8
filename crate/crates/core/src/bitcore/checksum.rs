use serde::{Deserialize, Serialize};
use sha3::{Digest, Sha3_512};

use super::BitVec;
use crate::{Error, Result};

/// Checksum families for the extended codec.
///
/// `OnesCount` is not part of the simulation trio; it exists to make the
/// worked 5-bit example configuration executable in tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChecksumKind {
    /// First `c` bits of SHA3-512 over the packed message bits.
    Sha3Prefix,
    /// First `c` bits of CRC-8 (poly 0x07, init 0, no reflection, no final
    /// xor) over the packed message bits. Requires `c <= 8`.
    Crc8Prefix,
    /// Split the message left-to-right into `c`-bit pieces (last piece
    /// zero-padded on the right), sum the pieces, add 9, keep the lowest
    /// `c` bits.
    AdHoc,
    /// Number of one bits, lowest `c` bits.
    OnesCount,
}

impl ChecksumKind {
    pub fn label(&self) -> &'static str {
        match self {
            ChecksumKind::Sha3Prefix => "sha3",
            ChecksumKind::Crc8Prefix => "crc8",
            ChecksumKind::AdHoc => "adhoc",
            ChecksumKind::OnesCount => "ones-count",
        }
    }
}

/// A checksum function together with its output width `c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChecksumSpec {
    pub kind: ChecksumKind,
    pub c: u16,
}

impl ChecksumSpec {
    pub fn new(kind: ChecksumKind, c: usize) -> Result<Self> {
        if c == 0 || c > 16 {
            return Err(Error::InvalidConfig(format!(
                "checksum width {c} out of range 1..=16"
            )));
        }
        if kind == ChecksumKind::Crc8Prefix && c > 8 {
            return Err(Error::InvalidConfig(format!(
                "crc8 prefix supports at most 8 bits, got {c}"
            )));
        }
        Ok(Self { kind, c: c as u16 })
    }

    pub fn bits(&self) -> usize {
        self.c as usize
    }
}

/// `c`-bit checksum of `message`.
pub fn checksum(spec: &ChecksumSpec, message: &BitVec) -> BitVec {
    let bytes = message.to_bytes_msb();
    let value = checksum_value(spec, &bytes, message.len());
    BitVec::from_u64(value, spec.bits()).expect("validated width")
}

/// Core checksum over packed bits; shared by the [`BitVec`] interface and the
/// packed fast path in the Monte-Carlo engine. `bytes` holds `bit_len` bits
/// most-significant-first, zero-padded on the right.
pub(crate) fn checksum_value(spec: &ChecksumSpec, bytes: &[u8], bit_len: usize) -> u64 {
    let c = spec.bits();
    let mask = if c >= 64 { u64::MAX } else { (1u64 << c) - 1 };
    match spec.kind {
        ChecksumKind::Sha3Prefix => {
            let digest = Sha3_512::digest(bytes);
            BitVec::from_bytes_msb(&digest, c).expect("c <= 16").to_u64()
        }
        ChecksumKind::Crc8Prefix => {
            let crc = crc8_smbus(bytes);
            (crc >> (8 - c)) as u64
        }
        ChecksumKind::AdHoc => {
            let stream_bit = |k: usize| -> u64 { ((bytes[k / 8] >> (7 - k % 8)) & 1) as u64 };
            let mut sum = 0u64;
            let mut start = 0;
            while start < bit_len {
                let mut piece = 0u64;
                for offset in 0..c {
                    let k = start + offset;
                    let bit = if k < bit_len { stream_bit(k) } else { 0 };
                    piece = (piece << 1) | bit;
                }
                sum = sum.wrapping_add(piece);
                start += c;
            }
            sum.wrapping_add(9) & mask
        }
        ChecksumKind::OnesCount => {
            let ones: u64 = bytes.iter().map(|b| u64::from(b.count_ones() as u8)).sum();
            ones & mask
        }
    }
}

/// CRC-8 with polynomial 0x07, init 0x00, no reflection, no final xor.
fn crc8_smbus(data: &[u8]) -> u8 {
    let mut crc = 0u8;
    for &byte in data {
        crc ^= byte;
        for _ in 0..8 {
            crc = if crc & 0x80 != 0 {
                (crc << 1) ^ 0x07
            } else {
                crc << 1
            };
        }
    }
    crc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bv(s: &str) -> BitVec {
        s.parse().unwrap()
    }

    #[test]
    fn adhoc_examples() {
        // pieces {10, 1 -> 10}, sum 4, +9 = 13, low 2 bits = 01
        let spec = ChecksumSpec::new(ChecksumKind::AdHoc, 2).unwrap();
        assert_eq!(checksum(&spec, &bv("101")).to_string(), "01");
        // zero message isolates the +9 constant
        let spec = ChecksumSpec::new(ChecksumKind::AdHoc, 3).unwrap();
        assert_eq!(checksum(&spec, &bv("000000")).to_string(), "001");
    }

    #[test]
    fn crc8_of_zero_byte_is_zero() {
        let spec = ChecksumSpec::new(ChecksumKind::Crc8Prefix, 8).unwrap();
        assert_eq!(checksum(&spec, &bv("00000000")).to_u64(), 0);
    }

    #[test]
    fn crc8_known_value() {
        // CRC-8/SMBUS of "123456789" is 0xF4.
        assert_eq!(crc8_smbus(b"123456789"), 0xf4);
    }

    #[test]
    fn ones_count_examples() {
        let spec = ChecksumSpec::new(ChecksumKind::OnesCount, 2).unwrap();
        assert_eq!(checksum(&spec, &bv("101")).to_string(), "10");
        assert_eq!(checksum(&spec, &bv("000")).to_string(), "00");
        assert_eq!(checksum(&spec, &bv("111")).to_string(), "11");
    }

    #[test]
    fn crc8_width_capped() {
        assert!(ChecksumSpec::new(ChecksumKind::Crc8Prefix, 9).is_err());
        assert!(ChecksumSpec::new(ChecksumKind::Crc8Prefix, 8).is_ok());
    }

    proptest! {
        #[test]
        fn checksum_is_pure(value in any::<u64>(), len in 1usize..=64,
                            c in 1usize..=8, kind_pick in 0usize..4) {
            let kind = [ChecksumKind::Sha3Prefix, ChecksumKind::Crc8Prefix,
                        ChecksumKind::AdHoc, ChecksumKind::OnesCount][kind_pick];
            let spec = ChecksumSpec::new(kind, c).unwrap();
            let msg = BitVec::from_u64(value, len).unwrap();
            prop_assert_eq!(checksum(&spec, &msg), checksum(&spec, &msg));
            prop_assert_eq!(checksum(&spec, &msg).len(), c);
        }
    }
}
