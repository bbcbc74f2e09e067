//! Binary words used for messages, codewords and received sequences.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Error returned when parsing a bitstring.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid character {found:?} at offset {offset} (expected '0' or '1')")]
pub struct ParseBitWordError {
    pub offset: usize,
    pub found: char,
}

/// A finite sequence over {0, 1}.
///
/// Storage is zero-based, but every positional quantity exposed by this crate
/// (checksums, channel events, parity positions) is one-based: `bit(1)` is the
/// first symbol. The text form writes position 1 first.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct BitWord(Vec<u8>);

impl BitWord {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    /// Builds a word from arbitrary bytes, mapping every nonzero byte to 1.
    pub fn from_bits<I: IntoIterator<Item = u8>>(bits: I) -> Self {
        Self(bits.into_iter().map(|b| u8::from(b != 0)).collect())
    }

    /// The `len` low-order bits of `value`, most significant bit first.
    pub fn from_integer(value: u64, len: usize) -> Self {
        Self((0..len).rev().map(|i| ((value >> i) & 1) as u8).collect())
    }

    /// Inverse of [`BitWord::from_integer`]. Words longer than 64 bits keep
    /// only their trailing 64 bits.
    pub fn to_integer(&self) -> u64 {
        self.0.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    /// One-based accessor.
    ///
    /// # Panics
    ///
    /// If `position` is 0 or beyond the end of the word.
    pub fn bit(&self, position: usize) -> u8 {
        assert!(position >= 1, "positions are one-based");
        self.0[position - 1]
    }

    pub fn set(&mut self, position: usize, bit: u8) {
        assert!(position >= 1, "positions are one-based");
        self.0[position - 1] = u8::from(bit != 0);
    }

    pub fn flip(&mut self, position: usize) {
        assert!(position >= 1, "positions are one-based");
        self.0[position - 1] ^= 1;
    }

    /// Inserts `bit` so that it ends up at one-based `position`
    /// (`1..=len + 1`).
    pub fn insert(&mut self, position: usize, bit: u8) {
        assert!(position >= 1, "positions are one-based");
        self.0.insert(position - 1, u8::from(bit != 0));
    }

    /// Removes and returns the bit at one-based `position`.
    pub fn remove(&mut self, position: usize) -> u8 {
        assert!(position >= 1, "positions are one-based");
        self.0.remove(position - 1)
    }

    pub fn push(&mut self, bit: u8) {
        self.0.push(u8::from(bit != 0));
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        self.0.iter().copied()
    }

    /// Number of ones.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    /// Truncates or pads with trailing zeros to exactly `len` bits.
    pub fn fit_to(&self, len: usize) -> BitWord {
        let mut bits = self.0.clone();
        bits.resize(len, 0);
        Self(bits)
    }

    /// Hamming distance over the common prefix plus the length difference.
    pub fn bit_errors(&self, other: &BitWord) -> usize {
        let common = self
            .0
            .iter()
            .zip(other.0.iter())
            .filter(|(a, b)| a != b)
            .count();
        common + self.len().abs_diff(other.len())
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.0.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitWord({self})")
    }
}

impl FromStr for BitWord {
    type Err = ParseBitWordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .enumerate()
            .map(|(offset, c)| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                found => Err(ParseBitWordError { offset, found }),
            })
            .collect::<Result<Vec<u8>, _>>()
            .map(Self)
    }
}

impl From<BitWord> for String {
    fn from(w: BitWord) -> String {
        w.to_string()
    }
}

impl TryFrom<String> for BitWord {
    type Error = ParseBitWordError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Vec<u8>> for BitWord {
    fn from(v: Vec<u8>) -> Self {
        Self::from_bits(v)
    }
}

impl From<&[u8]> for BitWord {
    fn from(v: &[u8]) -> Self {
        Self::from_bits(v.iter().copied())
    }
}

impl FromIterator<u8> for BitWord {
    fn from_iter<I: IntoIterator<Item = u8>>(iter: I) -> Self {
        Self::from_bits(iter)
    }
}

impl AsRef<[u8]> for BitWord {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}
