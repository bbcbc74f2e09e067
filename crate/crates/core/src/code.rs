//! Binary Varshamov-Tenengolts codes `VT_{a,m}(n)` with `m = 2n + 1`.
//!
//! A word `v` of length `n` is a codeword iff `sum_{i=1}^{n} i * v_i == a (mod m)`.
//! All positions in this module are one-based, matching that sum.
//!
//! The systematic encoder places the message in every position except the
//! powers of two `1, 2, 4, ..., 2^(c-1)` (with `c = ceil(log2 n)`) and the last
//! position `n`, then chooses those parity bits to hit the target residue.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitWord;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("code length {0} is too short (need n >= 3)")]
    LengthTooShort(usize),
    #[error("residue {a} out of range for modulus {m}")]
    ResidueOutOfRange { a: usize, m: usize },
    #[error("message has {found} bits, code expects {expected}")]
    MessageLength { expected: usize, found: usize },
    #[error("word has {found} bits, code length is {expected}")]
    WordLength { expected: usize, found: usize },
    #[error("parity deficit {deficit} cannot be expressed with the available parity positions")]
    UnrepresentableDeficit { deficit: usize },
}

/// `ceil(log2 n)` from the bit length of `n - 1`; exact for every `n >= 1`.
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// Parameters of one code `VT_{a,2n+1}(n)` together with its systematic layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct VtParams {
    n: usize,
    a: usize,
    parity_positions: Vec<usize>,
    message_positions: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    n: usize,
    a: usize,
}

impl TryFrom<RawParams> for VtParams {
    type Error = CodeError;
    fn try_from(raw: RawParams) -> Result<Self, CodeError> {
        VtParams::new(raw.n, raw.a)
    }
}

impl From<VtParams> for RawParams {
    fn from(p: VtParams) -> Self {
        RawParams { n: p.n, a: p.a }
    }
}

impl VtParams {
    pub fn new(n: usize, a: usize) -> Result<Self, CodeError> {
        if n < 3 {
            return Err(CodeError::LengthTooShort(n));
        }
        let m = 2 * n + 1;
        if a >= m {
            return Err(CodeError::ResidueOutOfRange { a, m });
        }
        let c = ceil_log2(n);
        let mut parity_positions: Vec<usize> = (0..c).map(|i| 1usize << i).collect();
        parity_positions.push(n);
        let message_positions = (1..=n).filter(|p| !parity_positions.contains(p)).collect();
        Ok(Self {
            n,
            a,
            parity_positions,
            message_positions,
        })
    }

    /// `VT_{0,2n+1}(n)`.
    pub fn with_length(n: usize) -> Result<Self, CodeError> {
        Self::new(n, 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn m(&self) -> usize {
        2 * self.n + 1
    }

    /// Message length `n - ceil(log2 n) - 1`.
    pub fn message_len(&self) -> usize {
        self.message_positions.len()
    }

    /// One-based parity positions, ascending; the last entry is `n`.
    pub fn parity_positions(&self) -> &[usize] {
        &self.parity_positions
    }

    /// One-based message positions, ascending.
    pub fn message_positions(&self) -> &[usize] {
        &self.message_positions
    }

    /// Largest deficit the power-of-two positions can absorb on their own.
    fn power_span(&self) -> usize {
        (1usize << ceil_log2(self.n)) - 1
    }

    /// `sum i * bit_i mod m` over the whole word, whatever its length.
    pub fn checksum(&self, word: &BitWord) -> usize {
        checksum_mod(word, self.m())
    }

    pub fn is_codeword(&self, word: &BitWord) -> bool {
        word.len() == self.n && self.checksum(word) == self.a
    }

    pub fn encode(&self, message: &BitWord) -> Result<BitWord, CodeError> {
        let y = self.message_len();
        if message.len() != y {
            return Err(CodeError::MessageLength {
                expected: y,
                found: message.len(),
            });
        }
        let m = self.m();
        let mut word = BitWord::zeros(self.n);
        let mut partial = 0usize;
        for (&pos, bit) in self.message_positions.iter().zip(message.iter()) {
            word.set(pos, bit);
            partial += pos * usize::from(bit);
        }
        let mut deficit = (self.a + m - partial % m) % m;
        if deficit > self.power_span() {
            word.set(self.n, 1);
            deficit -= self.n;
        }
        if deficit > self.power_span() {
            return Err(CodeError::UnrepresentableDeficit { deficit });
        }
        for &pos in &self.parity_positions[..self.parity_positions.len() - 1] {
            if deficit & pos != 0 {
                word.set(pos, 1);
            }
        }
        debug_assert!(self.is_codeword(&word));
        Ok(word)
    }

    pub fn extract_message(&self, codeword: &BitWord) -> Result<BitWord, CodeError> {
        if codeword.len() != self.n {
            return Err(CodeError::WordLength {
                expected: self.n,
                found: codeword.len(),
            });
        }
        Ok(self.message_positions.iter().map(|&p| codeword.bit(p)).collect())
    }

    /// Every length-`n` word with checksum `a`, in increasing integer order.
    /// Exponential in `n`; intended for small codes and test oracles.
    pub fn codebook(&self) -> Vec<BitWord> {
        assert!(self.n <= 24, "codebook enumeration is limited to n <= 24");
        (0..1u64 << self.n)
            .map(|v| BitWord::from_integer(v, self.n))
            .filter(|w| self.checksum(w) == self.a)
            .collect()
    }
}

/// `sum_{i} i * word_i mod m`, one-based.
pub fn checksum_mod(word: &BitWord, m: usize) -> usize {
    word.iter()
        .enumerate()
        .filter(|(_, b)| *b == 1)
        .fold(0usize, |acc, (i, _)| (acc + i + 1) % m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> BitWord {
        s.parse().unwrap()
    }

    #[test]
    fn layout_for_lengths_20_68_120() {
        for (n, y) in [(10, 5), (20, 14), (68, 60), (120, 112)] {
            let p = VtParams::with_length(n).unwrap();
            assert_eq!(p.m(), 2 * n + 1);
            assert_eq!(p.message_len(), y, "n = {n}");
            assert_eq!(p.parity_positions().len(), n - y);
            let mut all: Vec<usize> = p
                .parity_positions()
                .iter()
                .chain(p.message_positions())
                .copied()
                .collect();
            all.sort_unstable();
            assert_eq!(all, (1..=n).collect::<Vec<_>>());
        }
        let p = VtParams::with_length(10).unwrap();
        assert_eq!(p.parity_positions(), &[1, 2, 4, 8, 10]);
        assert_eq!(p.message_positions(), &[3, 5, 6, 7, 9]);
    }

    #[test]
    fn ceil_log2_boundaries() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(ceil_log2(9), 4);
        assert_eq!(ceil_log2(120), 7);
        assert_eq!(ceil_log2(128), 7);
        assert_eq!(ceil_log2(129), 8);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(VtParams::new(2, 0), Err(CodeError::LengthTooShort(2)));
        assert_eq!(
            VtParams::new(10, 21),
            Err(CodeError::ResidueOutOfRange { a: 21, m: 21 })
        );
    }

    #[test]
    fn checksum_examples() {
        let p = VtParams::with_length(10).unwrap();
        // 3 + 5 + 7 + 8 + 9 + 10 = 42 = 2 * 21
        assert_eq!(p.checksum(&w("0010101111")), 0);
        assert_eq!(p.checksum(&w("0000000000")), 0);
        assert_eq!(p.checksum(&w("0010111111")), 6);
    }

    #[test]
    fn membership_examples() {
        let p = VtParams::with_length(10).unwrap();
        assert!(p.is_codeword(&w("0010101111")));
        assert!(p.is_codeword(&w("0000000000")));
        assert!(!p.is_codeword(&w("0010101110")));
        assert!(!p.is_codeword(&w("001010111")));
    }

    #[test]
    fn worked_encoding_example() {
        let p = VtParams::with_length(10).unwrap();
        assert_eq!(p.encode(&w("11011")).unwrap(), w("0010101111"));
        assert_eq!(p.encode(&w("00000")).unwrap(), w("0000000000"));
        assert_eq!(p.extract_message(&w("0010101111")).unwrap(), w("11011"));
        assert_eq!(p.extract_message(&w("0000000000")).unwrap(), w("00000"));
    }

    #[test]
    fn encode_checks_message_length() {
        let p = VtParams::with_length(10).unwrap();
        assert_eq!(
            p.encode(&w("1101")),
            Err(CodeError::MessageLength {
                expected: 5,
                found: 4
            })
        );
        assert_eq!(
            p.extract_message(&w("1101")),
            Err(CodeError::WordLength {
                expected: 10,
                found: 4
            })
        );
    }

    #[test]
    fn exhaustive_round_trip_n10_n20() {
        for n in [10usize, 20] {
            let p = VtParams::with_length(n).unwrap();
            let y = p.message_len();
            let mut seen = std::collections::HashSet::new();
            for u in 0..1u64 << y {
                let msg = BitWord::from_integer(u, y);
                let cw = p.encode(&msg).unwrap();
                assert!(p.is_codeword(&cw));
                assert_eq!(p.extract_message(&cw).unwrap(), msg);
                assert!(seen.insert(cw), "encoder not injective at n = {n}");
            }
            assert_eq!(seen.len(), 1 << y);
        }
    }

    #[test]
    fn nonzero_residue_round_trip() {
        let p = VtParams::new(20, 17).unwrap();
        for u in (0..1u64 << 14).step_by(7) {
            let msg = BitWord::from_integer(u, 14);
            let cw = p.encode(&msg).unwrap();
            assert_eq!(p.checksum(&cw), 17);
            assert_eq!(p.extract_message(&cw).unwrap(), msg);
        }
    }

    #[test]
    fn power_of_two_length_guards_the_single_bad_deficit() {
        // n = 8: positions 3, 5, 6, 7 carry the message. A message sum of 18
        // leaves deficit 16 = 2n, which {1, 2, 4} plus position 8 cannot reach.
        let p = VtParams::with_length(8).unwrap();
        assert_eq!(p.message_len(), 4);
        assert_eq!(
            p.encode(&w("0111")),
            Err(CodeError::UnrepresentableDeficit { deficit: 8 })
        );
        let ok = (0..16u64)
            .filter(|&u| p.encode(&BitWord::from_integer(u, 4)).is_ok())
            .count();
        assert_eq!(ok, 15);
    }

    #[test]
    fn codebook_of_length_ten_contains_encoder_range() {
        let p = VtParams::with_length(10).unwrap();
        let book = p.codebook();
        for u in 0..32u64 {
            let cw = p.encode(&BitWord::from_integer(u, 5)).unwrap();
            assert!(book.binary_search(&cw).is_ok());
        }
        assert!(book.iter().all(|c| p.is_codeword(c)));
    }
}
