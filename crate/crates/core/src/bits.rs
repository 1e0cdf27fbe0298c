//! Packed binary vectors.
//!
//! Bit `i` lives in word `i / 64` at position `i % 64`. Unused high bits of the
//! last word are always zero, so equality, hashing and popcounts work on whole
//! words.
//!
//! Text forms:
//! - bit strings: one `0`/`1` character per bit, bit 0 first;
//! - hex strings: `0x` followed by `ceil(len / 4)` nibbles, most-significant
//!   nibble first. Bit 0 is the high bit of the first nibble; the last nibble
//!   is zero-padded on the right.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self {
            len,
            words: vec![!0; len.div_ceil(64)],
        };
        v.clear_tail();
        v
    }

    /// Builds a vector from any iterator of booleans.
    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % 64 == 0 {
                words.push(0);
            }
            if b {
                words[len / 64] |= 1 << (len % 64);
            }
            len += 1;
        }
        Self { len, words }
    }

    /// Builds a vector from 0/1 bytes; any nonzero byte counts as 1.
    pub fn from_bytes(bits: &[u8]) -> Self {
        Self::from_bools(bits.iter().map(|&b| b != 0))
    }

    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    /// Number of ones.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// XORs `other` into `self`.
    ///
    /// # Panics
    ///
    /// Panics if the lengths differ.
    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn hamming_distance(&self, other: &BitVec) -> usize {
        assert_eq!(self.len, other.len, "distance between vectors of different lengths");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_bit_string(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }

    pub fn to_hex_string(&self) -> String {
        let mut s = String::with_capacity(2 + self.len.div_ceil(4));
        s.push_str("0x");
        for nibble in 0..self.len.div_ceil(4) {
            let mut value = 0u32;
            for j in 0..4 {
                let i = nibble * 4 + j;
                value <<= 1;
                if i < self.len && self.get(i) {
                    value |= 1;
                }
            }
            s.push(char::from_digit(value, 16).unwrap());
        }
        s
    }

    pub fn parse_bit_string(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("unexpected character {other:?} in bit string"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::from_bools)
    }

    /// Parses a hex string (with or without `0x`) holding exactly `len` bits.
    pub fn parse_hex(s: &str, len: usize) -> Result<Self> {
        let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
        let expected = len.div_ceil(4);
        if digits.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: digits.len(),
            });
        }
        let mut out = Self::zeros(len);
        for (nibble, c) in digits.chars().enumerate() {
            let value = c
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("unexpected character {c:?} in hex string")))?;
            for j in 0..4 {
                let bit = (value >> (3 - j)) & 1 == 1;
                let i = nibble * 4 + j;
                if i < len {
                    out.set(i, bit);
                } else if bit {
                    return Err(Error::Parse("nonzero padding bits in hex string".into()));
                }
            }
        }
        Ok(out)
    }

    /// Parses either text form and checks the length.
    ///
    /// A `0x` prefix selects hex; a string of only `0`/`1` characters is a bit
    /// string; anything else is tried as bare hex.
    pub fn parse(s: &str, len: usize) -> Result<Self> {
        let s = s.trim();
        let v = if s.starts_with("0x") || s.starts_with("0X") {
            Self::parse_hex(s, len)?
        } else if !s.is_empty() && s.chars().all(|c| c == '0' || c == '1') {
            Self::parse_bit_string(s)?
        } else {
            Self::parse_hex(s, len)?
        };
        if v.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                found: v.len(),
            });
        }
        Ok(v)
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({})", self.to_bit_string())
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tail_bits_stay_clear() {
        let mut v = BitVec::ones(70);
        assert_eq!(v.weight(), 70);
        assert_eq!(v.words_mut()[1], (1 << 6) - 1);
    }

    #[test]
    fn hex_layout() {
        let v = BitVec::parse_bit_string("0101").unwrap();
        assert_eq!(v.to_hex_string(), "0x5");
        let w = BitVec::parse_bit_string("100000001").unwrap();
        assert_eq!(w.to_hex_string(), "0x808");
        assert_eq!(BitVec::parse_hex("0x808", 9).unwrap(), w);
    }

    #[test]
    fn hex_rejects_padding_and_bad_length() {
        assert!(BitVec::parse_hex("0x9", 3).is_err());
        assert!(matches!(
            BitVec::parse_hex("0x00", 3),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn parse_dispatch() {
        assert_eq!(BitVec::parse("011", 3).unwrap().to_bit_string(), "011");
        assert_eq!(BitVec::parse("0x6", 3).unwrap().to_bit_string(), "011");
        assert_eq!(BitVec::parse("a", 4).unwrap().to_bit_string(), "1010");
        assert!(matches!(
            BitVec::parse("0100", 3),
            Err(Error::LengthMismatch { expected: 3, found: 4 })
        ));
    }

    proptest! {
        #[test]
        fn text_forms_round_trip(bits in proptest::collection::vec(any::<bool>(), 0..200)) {
            let v = BitVec::from_bools(bits.iter().copied());
            prop_assert_eq!(BitVec::parse_hex(&v.to_hex_string(), v.len()).unwrap(), v.clone());
            prop_assert_eq!(BitVec::parse_bit_string(&v.to_bit_string()).unwrap(), v);
        }
    }
}
