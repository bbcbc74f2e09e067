//! Additive self-attention masks.
//!
//! Query `k` may attend to key `j` iff `j <= k` (causal) and `k - j <= w`
//! (window). The combined mask is 0 on allowed entries and `-inf` elsewhere,
//! so the diagonal is always allowed and `w >= L - 1` reduces to plain
//! causal masking.

use crate::linalg::Scalar;

pub fn allowed(k: usize, j: usize, window: usize) -> bool {
    j <= k && k - j <= window
}

/// Causal part alone: 0 for `j <= k`, `-inf` above the diagonal.
pub fn causal_mask<T: Scalar>(len: usize) -> Vec<T> {
    build_masks(len, len)
}

/// Window part alone: 0 for `k - j <= w`, `-inf` for keys more than `w`
/// steps in the past. Future keys are left open.
pub fn window_mask<T: Scalar>(len: usize, window: usize) -> Vec<T> {
    let mut m = vec![T::zero(); len * len];
    for k in 0..len {
        for j in 0..len {
            if j + window < k {
                m[k * len + j] = T::neg_infinity();
            }
        }
    }
    m
}

/// `len x len` row-major sum of the causal and window masks.
pub fn build_masks<T: Scalar>(len: usize, window: usize) -> Vec<T> {
    let mut m = vec![T::neg_infinity(); len * len];
    for k in 0..len {
        for j in 0..len {
            if allowed(k, j, window) {
                m[k * len + j] = T::zero();
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pattern(len: usize, w: usize) -> Vec<Vec<usize>> {
        let m = build_masks::<f64>(len, w);
        (0..len)
            .map(|k| (0..len).filter(|&j| m[k * len + j] == 0.0).map(|j| j + 1).collect())
            .collect()
    }

    #[test]
    fn small_patterns() {
        assert_eq!(pattern(3, 2), vec![vec![1], vec![1, 2], vec![1, 2, 3]]);
        assert_eq!(pattern(3, 5), pattern(3, 2));
        assert_eq!(pattern(3, 1), vec![vec![1], vec![1, 2], vec![2, 3]]);
    }

    #[test]
    fn combined_is_sum_of_parts() {
        for len in 1..9 {
            for w in 1..10 {
                let sum: Vec<f64> = causal_mask::<f64>(len)
                    .iter()
                    .zip(window_mask::<f64>(len, w))
                    .map(|(a, b)| a + b)
                    .collect();
                assert_eq!(sum, build_masks::<f64>(len, w));
            }
        }
    }
}
