use super::BitVec;
use crate::{Error, Result};

/// Iterator over flip-index tuples in the canonical order shared by sender
/// and receiver: distance 0 first (the empty tuple), then distance 1 flipping
/// bit 0, 1, ..., len-1 (right to left), then each higher distance in
/// lexicographically increasing order of the ascending index tuple.
#[derive(Clone, Debug)]
pub struct FlipPatterns {
    len: usize,
    t: usize,
    distance: usize,
    indices: Vec<usize>,
    started: bool,
    exhausted: bool,
}

impl FlipPatterns {
    pub fn new(len: usize, t: usize) -> Result<Self> {
        if t > len {
            return Err(Error::ModificationBound { t, len });
        }
        Ok(Self {
            len,
            t,
            distance: 0,
            indices: Vec::new(),
            started: false,
            exhausted: false,
        })
    }

    /// Advance to the next tuple; returns the flip indices, ascending.
    pub fn advance(&mut self) -> Option<&[usize]> {
        if self.exhausted {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.indices); // distance 0: empty tuple
        }
        // next combination of `distance` indices, lex order
        let d = self.distance;
        let mut pos = d;
        while pos > 0 {
            pos -= 1;
            if self.indices[pos] < self.len - (d - pos) {
                self.indices[pos] += 1;
                for k in pos + 1..d {
                    self.indices[k] = self.indices[k - 1] + 1;
                }
                return Some(&self.indices);
            }
        }
        // move to the next distance
        if self.distance < self.t {
            self.distance += 1;
            self.indices = (0..self.distance).collect();
            Some(&self.indices)
        } else {
            self.exhausted = true;
            None
        }
    }

    /// Same tuples rendered as 64-bit xor masks; only valid for `len <= 64`.
    pub fn advance_mask(&mut self) -> Option<u64> {
        debug_assert!(self.len <= 64);
        self.advance()
            .map(|idxs| idxs.iter().fold(0u64, |m, &i| m | (1u64 << i)))
    }
}

/// Iterator over every vector within Hamming distance `t` of `base`, in the
/// canonical order of [`FlipPatterns`]. The first yielded vector is `base`
/// itself.
pub struct Modifications {
    base: BitVec,
    patterns: FlipPatterns,
}

/// Enumerate all vectors at distance <= `t` from `base` in canonical order.
///
/// Yields exactly `sum_{j=0}^{t} C(len, j)` distinct vectors.
pub fn enumerate_modifications(base: &BitVec, t: usize) -> Result<Modifications> {
    Ok(Modifications {
        base: *base,
        patterns: FlipPatterns::new(base.len(), t)?,
    })
}

impl Iterator for Modifications {
    type Item = BitVec;

    fn next(&mut self) -> Option<BitVec> {
        let base = self.base;
        self.patterns.advance().map(|idxs| {
            let mut v = base;
            for &i in idxs {
                v.flip(i);
            }
            v
        })
    }
}
