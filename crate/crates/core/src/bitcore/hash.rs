use aes::cipher::{Array, BlockCipherEncrypt, KeyInit};
use aes::Aes128;
use serde::{Deserialize, Serialize};
use sha3::{Digest, Sha3_512};

use super::BitVec;
use crate::{Error, Result};

/// Hash function backing a channel or a simulation stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HashAlgorithm {
    /// First `h` bits of SHA3-512 over the raw input bytes.
    Sha3_512Prefix,
    /// First `h` bits of AES-128 over the input interpreted as one counter
    /// block. Used as the reproducible pseudo-random hash stream in
    /// simulations.
    AesCounterPrf,
}

/// Hash configuration: algorithm, output bit length and (for the PRF) key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashSpec {
    pub algorithm: HashAlgorithm,
    pub h: u16,
    /// 128-bit key, required for [`HashAlgorithm::AesCounterPrf`].
    pub key: Option<[u8; 16]>,
}

impl HashSpec {
    pub fn sha3(h: usize) -> Result<Self> {
        let spec = Self {
            algorithm: HashAlgorithm::Sha3_512Prefix,
            h: h as u16,
            key: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn aes_prf(h: usize, key: [u8; 16]) -> Result<Self> {
        let spec = Self {
            algorithm: HashAlgorithm::AesCounterPrf,
            h: h as u16,
            key: Some(key),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.h as usize;
        match self.algorithm {
            HashAlgorithm::Sha3_512Prefix => {
                if h == 0 || h > 512 {
                    return Err(Error::InvalidConfig(format!(
                        "sha3-512 prefix length {h} out of range 1..=512"
                    )));
                }
            }
            HashAlgorithm::AesCounterPrf => {
                if h == 0 || h > 128 {
                    return Err(Error::InvalidConfig(format!(
                        "aes counter prf length {h} out of range 1..=128"
                    )));
                }
                if self.key.is_none() {
                    return Err(Error::InvalidConfig("aes counter prf needs a key".into()));
                }
            }
        }
        Ok(())
    }

    pub fn bits(&self) -> usize {
        self.h as usize
    }
}

/// Hash `input` to a vector of `spec.h` bits.
///
/// For the PRF the input must be at most 16 bytes and is right-aligned into
/// one big-endian counter block, so hashing the 16-byte big-endian encoding
/// of `i` equals hashing plain `i`.
pub fn derive_hash(spec: &HashSpec, input: &[u8]) -> Result<BitVec> {
    spec.validate()?;
    if input.is_empty() {
        return Err(Error::EmptyInput("hash input"));
    }
    match spec.algorithm {
        HashAlgorithm::Sha3_512Prefix => {
            let digest = Sha3_512::digest(input);
            BitVec::from_bytes_msb(&digest, spec.bits())
        }
        HashAlgorithm::AesCounterPrf => {
            if input.len() > 16 {
                return Err(Error::InvalidConfig(format!(
                    "aes counter prf input is {} bytes, max 16",
                    input.len()
                )));
            }
            let mut block = [0u8; 16];
            block[16 - input.len()..].copy_from_slice(input);
            let cipher = Aes128::new(&Array::from(spec.key.unwrap()));
            let mut block = Array::from(block);
            cipher.encrypt_block(&mut block);
            BitVec::from_bytes_msb(&block, spec.bits())
        }
    }
}

/// Reproducible stream of hash values: element `i` is the PRF hash of the
/// 128-bit big-endian encoding of `i`.
pub fn prf_hash_stream(spec: &HashSpec, count: u64) -> Result<PrfHashStream> {
    spec.validate()?;
    if spec.algorithm != HashAlgorithm::AesCounterPrf {
        return Err(Error::InvalidConfig(
            "prf_hash_stream requires the aes counter prf".into(),
        ));
    }
    if count == 0 {
        return Err(Error::EmptyInput("prf stream count"));
    }
    Ok(PrfHashStream {
        cipher: Aes128::new(&Array::from(spec.key.unwrap())),
        h: spec.bits(),
        next: 0,
        count,
    })
}

/// Iterator over a PRF hash stream. See [`prf_hash_stream`].
pub struct PrfHashStream {
    cipher: Aes128,
    h: usize,
    next: u64,
    count: u64,
}

impl Iterator for PrfHashStream {
    type Item = BitVec;

    fn next(&mut self) -> Option<BitVec> {
        if self.next >= self.count {
            return None;
        }
        let mut block = Array::from((self.next as u128).to_be_bytes());
        self.cipher.encrypt_block(&mut block);
        self.next += 1;
        Some(BitVec::from_bytes_msb(&block, self.h).expect("h validated"))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rem = (self.count - self.next) as usize;
        (rem, Some(rem))
    }
}

/// First `h <= 64` bits of a 16-byte block as an integer (bit 0 = least
/// significant). Equals `BitVec::from_bytes_msb(block, h).to_u64()`.
pub(crate) fn prefix_u64(block: &[u8; 16], h: usize) -> u64 {
    debug_assert!((1..=64).contains(&h));
    u64::from_be_bytes(block[..8].try_into().unwrap()) >> (64 - h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sha3_prefixes_pinned() {
        // SHA3-512("a") = 697f2d...; SHA3-512("b") = 8417f3...
        let spec = HashSpec::sha3(8).unwrap();
        let ha = derive_hash(&spec, b"a").unwrap();
        let hb = derive_hash(&spec, b"b").unwrap();
        assert_eq!(ha.to_u64(), 0x69);
        assert_eq!(hb.to_u64(), 0x84);
        assert_ne!(ha, hb);
        assert_eq!(derive_hash(&spec, b"a").unwrap(), ha);
    }

    #[test]
    fn aes_prf_prefixes_pinned() {
        // AES-128, all-zero key: E(0) = 66e94bd4..., E(1) = 58e2fcce...
        let spec = HashSpec::aes_prf(16, [0u8; 16]).unwrap();
        let h0 = derive_hash(&spec, &0u128.to_be_bytes()).unwrap();
        let h1 = derive_hash(&spec, &1u128.to_be_bytes()).unwrap();
        assert_eq!(h0.to_u64(), 0x66e9);
        assert_eq!(h1.to_u64(), 0x58e2);
    }

    #[test]
    fn short_prf_input_right_aligned() {
        let spec = HashSpec::aes_prf(16, [7u8; 16]).unwrap();
        let a = derive_hash(&spec, &[0x05]).unwrap();
        let b = derive_hash(&spec, &5u128.to_be_bytes()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stream_matches_derive_hash_and_repeats() {
        let spec = HashSpec::aes_prf(12, [3u8; 16]).unwrap();
        let first: Vec<_> = prf_hash_stream(&spec, 5).unwrap().collect();
        let again: Vec<_> = prf_hash_stream(&spec, 5).unwrap().collect();
        assert_eq!(first, again);
        assert_eq!(first.len(), 5);
        assert_eq!(
            first[0],
            derive_hash(&spec, &0u128.to_be_bytes()).unwrap()
        );
        assert_eq!(
            first[4],
            derive_hash(&spec, &4u128.to_be_bytes()).unwrap()
        );
    }

    #[test]
    fn capacity_limits() {
        assert!(HashSpec::sha3(513).is_err());
        assert!(HashSpec::sha3(512).is_ok());
        assert!(HashSpec::aes_prf(129, [0; 16]).is_err());
        assert!(HashSpec::aes_prf(128, [0; 16]).is_ok());
    }

    proptest! {
        #[test]
        fn prefix_u64_matches_bitvec(bytes in any::<[u8; 16]>(), h in 1usize..=64) {
            let via_bitvec = BitVec::from_bytes_msb(&bytes, h).unwrap().to_u64();
            prop_assert_eq!(prefix_u64(&bytes, h), via_bitvec);
        }
    }
}
