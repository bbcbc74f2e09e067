//! Hard-decision decoder for a single insertion, deletion or substitution.
//!
//! Let `r` be the received word, `N` its length and `w` its weight. For a
//! codeword `v` with one edit at position `p` involving bit `x`:
//!
//! * deletion (`N = n - 1`): `a - checksum(r) = p*x + R1 (mod m)` where `R1`
//!   counts the ones right of the gap. A deficit `D <= w` means a 0 was lost
//!   with `D` ones to its right; otherwise a 1 was lost with `D - w - 1`
//!   zeros to its left.
//! * insertion (`N = n + 1`): `checksum(r) - a = p*x + R1`. `D < w` means a
//!   0 with `D` ones to its right was added; `D >= w` means a 1 with `D - w`
//!   zeros to its left (when `D == w` and `r_1 = 0` the leading zero run is
//!   the culprit instead).
//! * substitution (`N = n`): `D = checksum(r) - a` is `p` for a 0 -> 1 flip
//!   and `m - p` for 1 -> 0.
//!
//! With `m = 2n + 1` none of these deficits wrap, so the case split is exact.
//! Words outside single-edit reach are truncated or zero-padded to `n` bits
//! and reported as [`HdStatus::Fallback`].

use serde::{Deserialize, Serialize};

use crate::bits::BitWord;
use crate::code::VtParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HdStatus {
    Clean,
    CorrectedInsertion,
    CorrectedDeletion,
    CorrectedSubstitution,
    Fallback,
}

impl HdStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            HdStatus::Clean => "clean",
            HdStatus::CorrectedInsertion => "corrected_insertion",
            HdStatus::CorrectedDeletion => "corrected_deletion",
            HdStatus::CorrectedSubstitution => "corrected_substitution",
            HdStatus::Fallback => "fallback",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HdOutcome {
    /// Always `n` bits.
    pub decoded: BitWord,
    pub status: HdStatus,
    /// One-based position of the edit that was undone, in the received word
    /// for insertions and substitutions and in the decoded word for
    /// deletions. Any position inside the same run gives the same codeword,
    /// so this is informative only.
    pub edit_position: Option<usize>,
}

/// Truncates or zero-pads `received` to `n` bits.
pub fn fallback_word(received: &BitWord, n: usize) -> BitWord {
    received.fit_to(n)
}

pub fn decode_hd(received: &BitWord, params: &VtParams) -> HdOutcome {
    let n = params.n();
    let corrected = match received.len() {
        len if len == n => correct_substitution(received, params),
        len if len + 1 == n => correct_deletion(received, params),
        len if len == n + 1 => correct_insertion(received, params),
        _ => None,
    };
    match corrected {
        Some(outcome) if params.is_codeword(&outcome.decoded) => outcome,
        _ => HdOutcome {
            decoded: fallback_word(received, n),
            status: HdStatus::Fallback,
            edit_position: None,
        },
    }
}

fn correct_substitution(r: &BitWord, params: &VtParams) -> Option<HdOutcome> {
    let (n, m) = (params.n(), params.m());
    let d = (params.checksum(r) + m - params.a()) % m;
    if d == 0 {
        return Some(HdOutcome {
            decoded: r.clone(),
            status: HdStatus::Clean,
            edit_position: None,
        });
    }
    // 0 -> 1 at p raises the checksum by p; 1 -> 0 lowers it by p.
    let (p, expected) = if d <= n { (d, 1) } else { (m - d, 0) };
    if r.bit(p) != expected {
        return None;
    }
    let mut decoded = r.clone();
    decoded.flip(p);
    Some(HdOutcome {
        decoded,
        status: HdStatus::CorrectedSubstitution,
        edit_position: Some(p),
    })
}

fn correct_deletion(r: &BitWord, params: &VtParams) -> Option<HdOutcome> {
    let m = params.m();
    let d = (params.a() + m - params.checksum(r)) % m;
    let w = r.weight();
    let len = r.len();
    let (p, bit) = if d <= w {
        // Rightmost slot with exactly d ones after it.
        let mut ones = 0;
        let mut p = len + 1;
        while ones < d {
            p -= 1;
            ones += usize::from(r.bit(p));
        }
        (p, 0)
    } else {
        // Leftmost slot with exactly d - w - 1 zeros before it.
        let target = d - w - 1;
        let mut zeros = 0;
        let mut p = 1;
        while zeros < target {
            if p > len {
                return None;
            }
            zeros += usize::from(r.bit(p) == 0);
            p += 1;
        }
        (p, 1)
    };
    let mut decoded = r.clone();
    decoded.insert(p, bit);
    Some(HdOutcome {
        decoded,
        status: HdStatus::CorrectedDeletion,
        edit_position: Some(p),
    })
}

fn correct_insertion(r: &BitWord, params: &VtParams) -> Option<HdOutcome> {
    let m = params.m();
    let d = (params.checksum(r) + m - params.a()) % m;
    let w = r.weight();
    let zero_with_ones_right = |target: usize| {
        let mut ones = 0;
        for p in (1..=r.len()).rev() {
            if r.bit(p) == 1 {
                ones += 1;
            } else if ones == target {
                return Some(p);
            }
        }
        None
    };
    let one_with_zeros_left = |target: usize| {
        let mut zeros = 0;
        for p in 1..=r.len() {
            if r.bit(p) == 0 {
                zeros += 1;
            } else if zeros == target {
                return Some(p);
            }
        }
        None
    };
    let p = if d < w {
        zero_with_ones_right(d)?
    } else {
        one_with_zeros_left(d - w).or_else(|| (d == w).then(|| zero_with_ones_right(d)).flatten())?
    };
    let mut decoded = r.clone();
    decoded.remove(p);
    Some(HdOutcome {
        decoded,
        status: HdStatus::CorrectedInsertion,
        edit_position: Some(p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> BitWord {
        s.parse().unwrap()
    }

    fn p10() -> VtParams {
        VtParams::with_length(10).unwrap()
    }

    #[test]
    fn clean_codeword_passes_through() {
        let out = decode_hd(&w("0010101111"), &p10());
        assert_eq!(out.decoded, w("0010101111"));
        assert_eq!(out.status, HdStatus::Clean);
    }

    #[test]
    fn corrects_example_deletion() {
        let out = decode_hd(&w("001011111"), &p10());
        assert_eq!(out.decoded, w("0010101111"));
        assert_eq!(out.status, HdStatus::CorrectedDeletion);
    }

    #[test]
    fn corrects_example_substitution() {
        let out = decode_hd(&w("0010111111"), &p10());
        assert_eq!(out.decoded, w("0010101111"));
        assert_eq!(out.status, HdStatus::CorrectedSubstitution);
        assert_eq!(out.edit_position, Some(6));
    }

    #[test]
    fn every_single_edit_of_every_n10_codeword() {
        let p = p10();
        for v in p.codebook() {
            let mut received = Vec::new();
            for pos in 1..=11 {
                for bit in 0..=1 {
                    let mut r = v.clone();
                    r.insert(pos, bit);
                    received.push((r, HdStatus::CorrectedInsertion));
                }
            }
            for pos in 1..=10 {
                let mut r = v.clone();
                r.remove(pos);
                received.push((r, HdStatus::CorrectedDeletion));
                let mut r = v.clone();
                r.flip(pos);
                received.push((r, HdStatus::CorrectedSubstitution));
            }
            for (r, status) in received {
                let out = decode_hd(&r, &p);
                assert_eq!(out.decoded, v, "received {r}");
                assert_eq!(out.status, status, "received {r}");
            }
        }
    }

    #[test]
    fn nonzero_residue() {
        let p = VtParams::new(12, 5).unwrap();
        for v in p.codebook() {
            for pos in 1..=12 {
                let mut r = v.clone();
                r.remove(pos);
                assert_eq!(decode_hd(&r, &p).decoded, v);
                let mut r = v.clone();
                r.insert(pos, 1);
                assert_eq!(decode_hd(&r, &p).decoded, v);
            }
        }
    }

    #[test]
    fn far_lengths_fall_back_to_truncate_or_pad() {
        let p = p10();
        let out = decode_hd(&w("00101011"), &p);
        assert_eq!(out.status, HdStatus::Fallback);
        assert_eq!(out.decoded, w("0010101100"));
        let out = decode_hd(&w("001010111111"), &p);
        assert_eq!(out.status, HdStatus::Fallback);
        assert_eq!(out.decoded, w("0010101111"));
        let out = decode_hd(&BitWord::new(), &p);
        assert_eq!(out.decoded, BitWord::zeros(10));
    }

    #[test]
    fn inconsistent_substitution_syndrome_falls_back() {
        // checksum 3 would need a 0 -> 1 flip at position 3, but r_3 = 0.
        let p = p10();
        let r = w("1100000000");
        assert_eq!(p.checksum(&r), 3);
        let out = decode_hd(&r, &p);
        assert_eq!(out.status, HdStatus::Fallback);
        assert_eq!(out.decoded, r);
    }
}
