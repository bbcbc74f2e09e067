//! Codeword embedding: a per-position symbol gather plus the two statistic
//! lookups `s0 = sum of positions holding 0`, `s1 = sum of positions
//! holding 1`.
//!
//! Symbol row for one-based position `i` and bit `b` is `2 (i - 1) + b`.

use vt_core::BitWord;

use crate::error::TvtdError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Table {
    Symbol,
    Stat0,
    Stat1,
}

pub fn symbol_row(position: usize, bit: u8) -> usize {
    debug_assert!(position >= 1);
    2 * (position - 1) + usize::from(bit)
}

/// `(s0, s1)` of a word; `s0 + s1 = L (L + 1) / 2`.
pub fn stat_sums(word: &BitWord) -> (usize, usize) {
    word.iter().enumerate().fold((0, 0), |(s0, s1), (i, b)| {
        if b == 0 {
            (s0 + i + 1, s1)
        } else {
            (s0, s1 + i + 1)
        }
    })
}

/// Statistics of every proper prefix: entry `t` covers bits `1..t`
/// (entry 0 is the empty prefix). Length `word.len()`.
pub fn prefix_stats(word: &BitWord) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(word.len());
    let (mut s0, mut s1) = (0, 0);
    for (i, b) in word.iter().enumerate() {
        out.push((s0, s1));
        if b == 0 {
            s0 += i + 1;
        } else {
            s1 += i + 1;
        }
    }
    out
}

/// Borrowed view of one side's tables.
#[derive(Debug, Clone, Copy)]
pub struct EmbeddingTables<'a, T> {
    pub d_model: usize,
    /// `2 * positions` rows.
    pub symbol: &'a [T],
    /// `max_key + 1` rows each; `None` when statistics are ablated.
    pub stat0: Option<&'a [T]>,
    pub stat1: Option<&'a [T]>,
    pub positions: usize,
    pub max_key: usize,
}

impl<'a, T: Copy> EmbeddingTables<'a, T> {
    fn row(&self, table: Table, index: usize) -> &'a [T] {
        let d = self.d_model;
        let src = match table {
            Table::Symbol => self.symbol,
            Table::Stat0 => self.stat0.expect("stat0 table"),
            Table::Stat1 => self.stat1.expect("stat1 table"),
        };
        &src[index * d..(index + 1) * d]
    }

    fn check_len(&self, word: &BitWord) -> Result<(), TvtdError> {
        if word.len() > self.positions {
            return Err(TvtdError::LengthOverflow {
                len: word.len(),
                max: self.positions,
            });
        }
        Ok(())
    }

    fn check_key(&self, key: usize) -> Result<usize, TvtdError> {
        if key > self.max_key {
            return Err(TvtdError::KeyOverflow {
                key,
                max: self.max_key,
            });
        }
        Ok(key)
    }

    /// Table rows gathered by [`Self::embed_codeword`], in output order.
    pub fn memory_rows(&self, word: &BitWord) -> Result<Vec<(Table, usize)>, TvtdError> {
        self.check_len(word)?;
        let mut rows = Vec::with_capacity(word.len() + 2);
        if self.stat0.is_some() {
            let (s0, s1) = stat_sums(word);
            rows.push((Table::Stat0, self.check_key(s0)?));
            rows.push((Table::Stat1, self.check_key(s1)?));
        }
        rows.extend(word.iter().enumerate().map(|(i, b)| (Table::Symbol, symbol_row(i + 1, b))));
        Ok(rows)
    }

    fn gather(&self, rows: &[(Table, usize)]) -> Vec<T> {
        let mut out = Vec::with_capacity(rows.len() * self.d_model);
        for &(t, r) in rows {
            out.extend_from_slice(self.row(t, r));
        }
        out
    }

    /// `word.len() x d_model`, row `i` is `e_{i, word_i}`.
    pub fn symbol_embed(&self, word: &BitWord) -> Result<Vec<T>, TvtdError> {
        self.check_len(word)?;
        let rows: Vec<_> = word
            .iter()
            .enumerate()
            .map(|(i, b)| (Table::Symbol, symbol_row(i + 1, b)))
            .collect();
        Ok(self.gather(&rows))
    }

    /// `(stat0[s0], stat1[s1])`.
    pub fn stat_embed(&self, word: &BitWord) -> Result<(Vec<T>, Vec<T>), TvtdError> {
        let (s0, s1) = stat_sums(word);
        let (s0, s1) = (self.check_key(s0)?, self.check_key(s1)?);
        Ok((self.row(Table::Stat0, s0).to_vec(), self.row(Table::Stat1, s1).to_vec()))
    }

    /// Statistic pair followed by the symbol embedding; `|c| + 2` rows, or
    /// `|c|` with statistics ablated.
    pub fn embed_codeword(&self, word: &BitWord) -> Result<Vec<T>, TvtdError> {
        Ok(self.gather(&self.memory_rows(word)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> BitWord {
        s.parse().unwrap()
    }

    fn tables() -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let d = 3;
        let sym = (0..2 * 7 * d).map(|x| x as f64).collect();
        let s0 = (0..29 * d).map(|x| 1000.0 + x as f64).collect();
        let s1 = (0..29 * d).map(|x| 2000.0 + x as f64).collect();
        (sym, s0, s1)
    }

    #[test]
    fn statistics_of_worked_word() {
        assert_eq!(stat_sums(&w("01011")), (4, 11));
        assert_eq!(stat_sums(&w("11111")), (0, 15));
        assert_eq!(prefix_stats(&w("011")), vec![(0, 0), (1, 0), (1, 2)]);
    }

    #[test]
    fn gathers_the_selected_rows() {
        let (sym, s0, s1) = tables();
        let t = EmbeddingTables {
            d_model: 3,
            symbol: &sym,
            stat0: Some(&s0),
            stat1: Some(&s1),
            positions: 7,
            max_key: 28,
        };
        let out = t.symbol_embed(&w("01011")).unwrap();
        let expect_rows = [0usize, 3, 4, 7, 9];
        for (k, r) in expect_rows.iter().enumerate() {
            assert_eq!(&out[3 * k..3 * k + 3], &sym[3 * r..3 * r + 3]);
        }
        let (a, b) = t.stat_embed(&w("01011")).unwrap();
        assert_eq!(a, s0[12..15].to_vec());
        assert_eq!(b, s1[33..36].to_vec());
        let mem = t.embed_codeword(&w("01011")).unwrap();
        assert_eq!(mem.len(), 7 * 3);
        assert_eq!(&mem[..3], &a[..]);
        assert_eq!(&mem[6..], &out[..]);
    }

    #[test]
    fn ablated_statistics_shorten_memory() {
        let (sym, _, _) = tables();
        let t = EmbeddingTables {
            d_model: 3,
            symbol: &sym,
            stat0: None,
            stat1: None,
            positions: 7,
            max_key: 28,
        };
        assert_eq!(t.embed_codeword(&w("0101")).unwrap().len(), 4 * 3);
    }

    #[test]
    fn overflow_is_an_error() {
        let (sym, s0, s1) = tables();
        let t = EmbeddingTables {
            d_model: 3,
            symbol: &sym,
            stat0: Some(&s0),
            stat1: Some(&s1),
            positions: 7,
            max_key: 20,
        };
        assert!(matches!(
            t.symbol_embed(&w("00000000")),
            Err(TvtdError::LengthOverflow { len: 8, max: 7 })
        ));
        assert!(matches!(
            t.stat_embed(&w("1111111")),
            Err(TvtdError::KeyOverflow { key: 28, max: 20 })
        ));
    }
}
