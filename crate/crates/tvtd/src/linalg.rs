//! Dense kernels shared by the forward and backward passes.
//!
//! Everything is row-major. Matrix products go through `matrixmultiply`, which
//! accepts arbitrary strides, so per-head slices and transposes are views.

use std::fmt::Debug;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point element type of a model (f32 for training, f64 for
/// gradient checks).
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Default + Debug + Send + Sync + Sum + 'static
{
    const DTYPE: &'static str;

    /// # Safety
    ///
    /// Same contract as `matrixmultiply::sgemm`/`dgemm`.
    #[allow(clippy::too_many_arguments)]
    unsafe fn raw_gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    );

    fn write_le(values: &[Self], out: &mut Vec<u8>);
    fn read_le(bytes: &[u8]) -> Vec<Self>;

    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("representable constant")
    }
}

impl Scalar for f32 {
    const DTYPE: &'static str = "f32";

    unsafe fn raw_gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: f32,
        a: *const f32,
        rsa: isize,
        csa: isize,
        b: *const f32,
        rsb: isize,
        csb: isize,
        beta: f32,
        c: *mut f32,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::sgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }

    fn write_le(values: &[f32], out: &mut Vec<u8>) {
        for v in values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }

    fn read_le(bytes: &[u8]) -> Vec<f32> {
        bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect()
    }
}

impl Scalar for f64 {
    const DTYPE: &'static str = "f64";

    unsafe fn raw_gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: f64,
        a: *const f64,
        rsa: isize,
        csa: isize,
        b: *const f64,
        rsb: isize,
        csb: isize,
        beta: f64,
        c: *mut f64,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::dgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }

    fn write_le(values: &[f64], out: &mut Vec<u8>) {
        for v in values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }

    fn read_le(bytes: &[u8]) -> Vec<f64> {
        bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect()
    }
}

/// A strided matrix view into a slice.
#[derive(Clone, Copy)]
pub struct View<'a, T> {
    data: &'a [T],
    offset: usize,
    rows: usize,
    cols: usize,
    rs: usize,
    cs: usize,
}

impl<'a, T> View<'a, T> {
    /// `rows x cols` block starting at `offset` with leading dimension `ld`.
    pub fn new(data: &'a [T], offset: usize, rows: usize, cols: usize, ld: usize) -> Self {
        let v = Self {
            data,
            offset,
            rows,
            cols,
            rs: ld,
            cs: 1,
        };
        v.check();
        v
    }

    /// Whole contiguous `rows x cols` matrix.
    pub fn full(data: &'a [T], rows: usize, cols: usize) -> Self {
        Self::new(data, 0, rows, cols, cols)
    }

    pub fn t(self) -> Self {
        Self {
            rows: self.cols,
            cols: self.rows,
            rs: self.cs,
            cs: self.rs,
            ..self
        }
    }

    fn check(&self) {
        if self.rows > 0 && self.cols > 0 {
            let last = self.offset + (self.rows - 1) * self.rs + (self.cols - 1) * self.cs;
            assert!(last < self.data.len(), "matrix view out of bounds");
        }
    }
}

/// Mutable destination block, same addressing as [`View::new`].
pub struct ViewMut<'a, T> {
    data: &'a mut [T],
    offset: usize,
    rows: usize,
    cols: usize,
    ld: usize,
}

impl<'a, T> ViewMut<'a, T> {
    pub fn new(data: &'a mut [T], offset: usize, rows: usize, cols: usize, ld: usize) -> Self {
        if rows > 0 && cols > 0 {
            assert!(offset + (rows - 1) * ld + cols - 1 < data.len(), "matrix view out of bounds");
        }
        Self {
            data,
            offset,
            rows,
            cols,
            ld,
        }
    }

    pub fn full(data: &'a mut [T], rows: usize, cols: usize) -> Self {
        Self::new(data, 0, rows, cols, cols)
    }
}

/// `c <- alpha * a * b + beta * c`.
pub fn gemm<T: Scalar>(alpha: T, a: View<'_, T>, b: View<'_, T>, beta: T, c: ViewMut<'_, T>) {
    assert_eq!(a.cols, b.rows, "inner dimensions differ");
    assert_eq!((a.rows, b.cols), (c.rows, c.cols), "output shape mismatch");
    if c.rows == 0 || c.cols == 0 {
        return;
    }
    if a.cols == 0 {
        for r in 0..c.rows {
            for x in &mut c.data[c.offset + r * c.ld..c.offset + r * c.ld + c.cols] {
                *x = *x * beta;
            }
        }
        return;
    }
    // SAFETY: all three views were bounds-checked on construction and the
    // output does not alias the inputs (it is borrowed mutably).
    unsafe {
        T::raw_gemm(
            a.rows,
            a.cols,
            b.cols,
            alpha,
            a.data.as_ptr().add(a.offset),
            a.rs as isize,
            a.cs as isize,
            b.data.as_ptr().add(b.offset),
            b.rs as isize,
            b.cs as isize,
            beta,
            c.data.as_mut_ptr().add(c.offset),
            c.ld as isize,
            1,
        )
    }
}

/// `x @ w` for contiguous `x: rows x k` and `w: k x n`.
pub fn matmul<T: Scalar>(x: &[T], rows: usize, w: &[T], k: usize, n: usize) -> Vec<T> {
    let mut out = vec![T::zero(); rows * n];
    gemm(
        T::one(),
        View::full(x, rows, k),
        View::full(w, k, n),
        T::zero(),
        ViewMut::full(&mut out, rows, n),
    );
    out
}

pub fn add_assign<T: Scalar>(dst: &mut [T], src: &[T]) {
    assert_eq!(dst.len(), src.len());
    for (d, s) in dst.iter_mut().zip(src) {
        *d = *d + *s;
    }
}

pub fn add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| *x + *y).collect()
}

/// Row-wise softmax in place. Entries equal to `-inf` get weight exactly 0.
/// A row with no finite entry becomes all zeros.
pub fn softmax_rows<T: Scalar>(x: &mut [T], cols: usize) {
    for row in x.chunks_exact_mut(cols) {
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        if max == T::neg_infinity() {
            row.iter_mut().for_each(|v| *v = T::zero());
            continue;
        }
        let mut sum = T::zero();
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum = sum + *v;
        }
        for v in row.iter_mut() {
            *v = *v / sum;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gemm_with_transposed_view() {
        // a: 2x3, b: 2x3 -> a * b^T is 2x2
        let a = [1.0f64, 2.0, 3.0, 4.0, 5.0, 6.0];
        let b = [1.0f64, 0.0, 1.0, 0.0, 1.0, 0.0];
        let mut c = [0.0f64; 4];
        gemm(1.0, View::full(&a, 2, 3), View::full(&b, 2, 3).t(), 0.0, ViewMut::full(&mut c, 2, 2));
        assert_eq!(c, [4.0, 2.0, 10.0, 5.0]);
    }

    #[test]
    fn gemm_on_column_block() {
        // Take columns 1..3 of a 2x4 matrix and multiply by identity.
        let a = [1.0f32, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        let eye = [1.0f32, 0.0, 0.0, 1.0];
        let mut c = [9.0f32; 4];
        gemm(1.0, View::new(&a, 1, 2, 2, 4), View::full(&eye, 2, 2), 0.0, ViewMut::full(&mut c, 2, 2));
        assert_eq!(c, [2.0, 3.0, 6.0, 7.0]);
    }

    #[test]
    #[should_panic(expected = "out of bounds")]
    fn views_are_bounds_checked() {
        let a = [0.0f32; 4];
        View::new(&a, 1, 2, 2, 2);
    }

    #[test]
    fn softmax_masks_neg_infinity() {
        let mut x = [0.0f64, f64::NEG_INFINITY, 0.0, f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        softmax_rows(&mut x, 3);
        assert_eq!(x, [0.5, 0.0, 0.5, 0.0, 0.0, 0.0]);
    }
}
