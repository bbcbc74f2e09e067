//! Building blocks with hand-written backward passes. Activations are
//! row-major `rows x width` buffers; gradients accumulate into a
//! [`ParamStore`] with the model's layout.

use crate::linalg::{gemm, Scalar, View, ViewMut};
use crate::params::{ParamId, ParamStore};

const LN_EPS: f64 = 1e-5;

#[derive(Debug, Clone)]
pub(crate) struct Linear {
    pub w: ParamId,
    pub b: ParamId,
    pub d_in: usize,
    pub d_out: usize,
}

impl Linear {
    pub fn register<T: Scalar>(store: &mut ParamStore<T>, name: &str, d_in: usize, d_out: usize) -> Self {
        Self {
            w: store.add(format!("{name}.w"), &[d_in, d_out]),
            b: store.add(format!("{name}.b"), &[d_out]),
            d_in,
            d_out,
        }
    }

    pub fn forward<T: Scalar>(&self, p: &ParamStore<T>, x: &[T], rows: usize) -> Vec<T> {
        let mut y = Vec::with_capacity(rows * self.d_out);
        let bias = p.get(self.b);
        for _ in 0..rows {
            y.extend_from_slice(bias);
        }
        gemm(
            T::one(),
            View::full(x, rows, self.d_in),
            View::full(p.get(self.w), self.d_in, self.d_out),
            T::one(),
            ViewMut::full(&mut y, rows, self.d_out),
        );
        y
    }

    /// Accumulates weight and bias gradients and returns `dx`.
    pub fn backward<T: Scalar>(
        &self,
        p: &ParamStore<T>,
        g: &mut ParamStore<T>,
        x: &[T],
        dy: &[T],
        rows: usize,
    ) -> Vec<T> {
        self.backward_params(g, x, dy, rows);
        let mut dx = vec![T::zero(); rows * self.d_in];
        gemm(
            T::one(),
            View::full(dy, rows, self.d_out),
            View::full(p.get(self.w), self.d_in, self.d_out).t(),
            T::zero(),
            ViewMut::full(&mut dx, rows, self.d_in),
        );
        dx
    }

    pub fn backward_params<T: Scalar>(&self, g: &mut ParamStore<T>, x: &[T], dy: &[T], rows: usize) {
        gemm(
            T::one(),
            View::full(x, rows, self.d_in).t(),
            View::full(dy, rows, self.d_out),
            T::one(),
            ViewMut::full(g.get_mut(self.w), self.d_in, self.d_out),
        );
        let db = g.get_mut(self.b);
        for row in dy.chunks_exact(self.d_out) {
            for (acc, v) in db.iter_mut().zip(row) {
                *acc = *acc + *v;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LayerNorm {
    pub gain: ParamId,
    pub bias: ParamId,
    pub d: usize,
}

pub(crate) struct NormCache<T> {
    xhat: Vec<T>,
    rstd: Vec<T>,
}

impl LayerNorm {
    pub fn register<T: Scalar>(store: &mut ParamStore<T>, name: &str, d: usize) -> Self {
        Self {
            gain: store.add(format!("{name}.g"), &[d]),
            bias: store.add(format!("{name}.b"), &[d]),
            d,
        }
    }

    pub fn forward<T: Scalar>(&self, p: &ParamStore<T>, x: &[T]) -> (Vec<T>, NormCache<T>) {
        let d = self.d;
        let dt = T::of(d as f64);
        let eps = T::of(LN_EPS);
        let (gain, bias) = (p.get(self.gain), p.get(self.bias));
        let rows = x.len() / d;
        let mut y = vec![T::zero(); x.len()];
        let mut xhat = vec![T::zero(); x.len()];
        let mut rstd = Vec::with_capacity(rows);
        for r in 0..rows {
            let xr = &x[r * d..(r + 1) * d];
            let mean = xr.iter().copied().sum::<T>() / dt;
            let var = xr.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / dt;
            let rs = T::one() / (var + eps).sqrt();
            rstd.push(rs);
            for i in 0..d {
                let h = (xr[i] - mean) * rs;
                xhat[r * d + i] = h;
                y[r * d + i] = h * gain[i] + bias[i];
            }
        }
        (y, NormCache { xhat, rstd })
    }

    pub fn backward<T: Scalar>(
        &self,
        p: &ParamStore<T>,
        g: &mut ParamStore<T>,
        cache: &NormCache<T>,
        dy: &[T],
    ) -> Vec<T> {
        let d = self.d;
        let dt = T::of(d as f64);
        let gain = p.get(self.gain);
        {
            let dg = g.get_mut(self.gain);
            for (row, xh) in dy.chunks_exact(d).zip(cache.xhat.chunks_exact(d)) {
                for i in 0..d {
                    dg[i] = dg[i] + row[i] * xh[i];
                }
            }
        }
        {
            let db = g.get_mut(self.bias);
            for row in dy.chunks_exact(d) {
                for i in 0..d {
                    db[i] = db[i] + row[i];
                }
            }
        }
        let mut dx = vec![T::zero(); dy.len()];
        let mut dxh = vec![T::zero(); d];
        for (r, &rs) in cache.rstd.iter().enumerate() {
            let xh = &cache.xhat[r * d..(r + 1) * d];
            let mut mean_dxh = T::zero();
            let mut mean_dxh_xh = T::zero();
            for i in 0..d {
                dxh[i] = dy[r * d + i] * gain[i];
                mean_dxh = mean_dxh + dxh[i];
                mean_dxh_xh = mean_dxh_xh + dxh[i] * xh[i];
            }
            mean_dxh = mean_dxh / dt;
            mean_dxh_xh = mean_dxh_xh / dt;
            for i in 0..d {
                dx[r * d + i] = rs * (dxh[i] - mean_dxh - xh[i] * mean_dxh_xh);
            }
        }
        dx
    }
}

/// Geometry of one batched attention call: `batch` independent sequences,
/// `tq` queries and `tk` keys each, `d = heads * dh` channels.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AttnShape {
    pub batch: usize,
    pub tq: usize,
    pub tk: usize,
    pub heads: usize,
    pub dh: usize,
}

impl AttnShape {
    fn d(&self) -> usize {
        self.heads * self.dh
    }
}

/// Masks applied to the `tq x tk` score matrix of every head.
#[derive(Clone, Copy)]
pub(crate) struct AttnMask<'a, T> {
    /// Additive `tq x tk` mask shared across the batch.
    pub additive: Option<&'a [T]>,
    /// Valid key count per sequence; later keys are padding.
    pub key_len: Option<&'a [usize]>,
}

/// Scaled dot-product attention on already projected `q`, `k`, `v`.
/// Returns the concatenated head outputs and the attention weights
/// (`batch x heads x tq x tk`).
pub(crate) fn attention_forward<T: Scalar>(
    q: &[T],
    k: &[T],
    v: &[T],
    s: AttnShape,
    mask: AttnMask<'_, T>,
) -> (Vec<T>, Vec<T>) {
    let d = s.d();
    let scale = T::one() / T::of(s.dh as f64).sqrt();
    let block = s.tq * s.tk;
    let mut probs = vec![T::zero(); s.batch * s.heads * block];
    let mut ctx = vec![T::zero(); s.batch * s.tq * d];
    for b in 0..s.batch {
        for h in 0..s.heads {
            let pb = &mut probs[(b * s.heads + h) * block..(b * s.heads + h + 1) * block];
            gemm(
                scale,
                View::new(q, b * s.tq * d + h * s.dh, s.tq, s.dh, d),
                View::new(k, b * s.tk * d + h * s.dh, s.tk, s.dh, d).t(),
                T::zero(),
                ViewMut::full(pb, s.tq, s.tk),
            );
            if let Some(m) = mask.additive {
                for (x, mv) in pb.iter_mut().zip(m) {
                    *x = *x + *mv;
                }
            }
            if let Some(lens) = mask.key_len {
                for row in pb.chunks_exact_mut(s.tk) {
                    row[lens[b]..].iter_mut().for_each(|x| *x = T::neg_infinity());
                }
            }
            crate::linalg::softmax_rows(pb, s.tk);
            gemm(
                T::one(),
                View::full(pb, s.tq, s.tk),
                View::new(v, b * s.tk * d + h * s.dh, s.tk, s.dh, d),
                T::zero(),
                ViewMut::new(&mut ctx, b * s.tq * d + h * s.dh, s.tq, s.dh, d),
            );
        }
    }
    (ctx, probs)
}

/// Returns `(dq, dk, dv)`.
pub(crate) fn attention_backward<T: Scalar>(
    q: &[T],
    k: &[T],
    v: &[T],
    probs: &[T],
    dctx: &[T],
    s: AttnShape,
) -> (Vec<T>, Vec<T>, Vec<T>) {
    let d = s.d();
    let scale = T::one() / T::of(s.dh as f64).sqrt();
    let block = s.tq * s.tk;
    let mut dq = vec![T::zero(); q.len()];
    let mut dk = vec![T::zero(); k.len()];
    let mut dv = vec![T::zero(); v.len()];
    let mut ds = vec![T::zero(); block];
    for b in 0..s.batch {
        for h in 0..s.heads {
            let p = &probs[(b * s.heads + h) * block..(b * s.heads + h + 1) * block];
            let q_off = b * s.tq * d + h * s.dh;
            let k_off = b * s.tk * d + h * s.dh;
            // dP = dctx V^T
            gemm(
                T::one(),
                View::new(dctx, q_off, s.tq, s.dh, d),
                View::new(v, k_off, s.tk, s.dh, d).t(),
                T::zero(),
                ViewMut::full(&mut ds, s.tq, s.tk),
            );
            gemm(
                T::one(),
                View::full(p, s.tq, s.tk).t(),
                View::new(dctx, q_off, s.tq, s.dh, d),
                T::zero(),
                ViewMut::new(&mut dv, k_off, s.tk, s.dh, d),
            );
            for (dsr, pr) in ds.chunks_exact_mut(s.tk).zip(p.chunks_exact(s.tk)) {
                let dot: T = dsr.iter().zip(pr).map(|(a, b)| *a * *b).sum();
                for (x, pv) in dsr.iter_mut().zip(pr) {
                    *x = *pv * (*x - dot);
                }
            }
            gemm(
                scale,
                View::full(&ds, s.tq, s.tk),
                View::new(k, k_off, s.tk, s.dh, d),
                T::zero(),
                ViewMut::new(&mut dq, q_off, s.tq, s.dh, d),
            );
            gemm(
                scale,
                View::full(&ds, s.tq, s.tk).t(),
                View::new(q, q_off, s.tq, s.dh, d),
                T::zero(),
                ViewMut::new(&mut dk, k_off, s.tk, s.dh, d),
            );
        }
    }
    (dq, dk, dv)
}

#[derive(Debug, Clone)]
pub(crate) struct MultiHead {
    pub q: Linear,
    pub k: Linear,
    pub v: Linear,
    pub o: Linear,
}

impl MultiHead {
    pub fn register<T: Scalar>(store: &mut ParamStore<T>, name: &str, d: usize) -> Self {
        Self {
            q: Linear::register(store, &format!("{name}.q"), d, d),
            k: Linear::register(store, &format!("{name}.k"), d, d),
            v: Linear::register(store, &format!("{name}.v"), d, d),
            o: Linear::register(store, &format!("{name}.o"), d, d),
        }
    }
}

/// Pre-norm attention sublayer cache: `x + o(attn(q(ln x), k(src), v(src)))`
/// where `src` is `ln x` for self-attention and the memory otherwise.
pub(crate) struct AttnCache<T> {
    norm: NormCache<T>,
    h: Vec<T>,
    q: Vec<T>,
    k: Vec<T>,
    v: Vec<T>,
    probs: Vec<T>,
    ctx: Vec<T>,
    shape: AttnShape,
}

pub(crate) struct AttnBlock {
    pub norm: LayerNorm,
    pub mh: MultiHead,
}

impl AttnBlock {
    /// `memory = None` is self-attention. Returns the updated residual.
    pub fn forward<T: Scalar>(
        &self,
        p: &ParamStore<T>,
        x: &[T],
        memory: Option<&[T]>,
        shape: AttnShape,
        mask: AttnMask<'_, T>,
    ) -> (Vec<T>, AttnCache<T>) {
        let rows_q = shape.batch * shape.tq;
        let rows_k = shape.batch * shape.tk;
        let (h, norm) = self.norm.forward(p, x);
        let src = memory.unwrap_or(&h);
        let q = self.mh.q.forward(p, &h, rows_q);
        let k = self.mh.k.forward(p, src, rows_k);
        let v = self.mh.v.forward(p, src, rows_k);
        let (ctx, probs) = attention_forward(&q, &k, &v, shape, mask);
        let o = self.mh.o.forward(p, &ctx, rows_q);
        let y = crate::linalg::add(x, &o);
        (
            y,
            AttnCache {
                norm,
                h,
                q,
                k,
                v,
                probs,
                ctx,
                shape,
            },
        )
    }

    /// Returns `dx`; memory gradients are added to `dmemory` when present.
    pub fn backward<T: Scalar>(
        &self,
        p: &ParamStore<T>,
        g: &mut ParamStore<T>,
        c: &AttnCache<T>,
        dy: &[T],
        memory: Option<(&[T], &mut [T])>,
    ) -> Vec<T> {
        let s = c.shape;
        let rows_q = s.batch * s.tq;
        let rows_k = s.batch * s.tk;
        let dctx = self.mh.o.backward(p, g, &c.ctx, dy, rows_q);
        let (dq, dk, dv) = attention_backward(&c.q, &c.k, &c.v, &c.probs, &dctx, s);
        let mut dh = self.mh.q.backward(p, g, &c.h, &dq, rows_q);
        match memory {
            Some((mem, dmem)) => {
                crate::linalg::add_assign(dmem, &self.mh.k.backward(p, g, mem, &dk, rows_k));
                crate::linalg::add_assign(dmem, &self.mh.v.backward(p, g, mem, &dv, rows_k));
            }
            None => {
                crate::linalg::add_assign(&mut dh, &self.mh.k.backward(p, g, &c.h, &dk, rows_k));
                crate::linalg::add_assign(&mut dh, &self.mh.v.backward(p, g, &c.h, &dv, rows_k));
            }
        }
        let mut dx = self.norm.backward(p, g, &c.norm, &dh);
        crate::linalg::add_assign(&mut dx, dy);
        dx
    }
}

pub(crate) struct FfCache<T> {
    norm: NormCache<T>,
    h: Vec<T>,
    act: Vec<T>,
}

/// Pre-norm position-wise feed-forward: `x + w2 relu(w1 ln x)`.
pub(crate) struct FfBlock {
    pub norm: LayerNorm,
    pub up: Linear,
    pub down: Linear,
}

impl FfBlock {
    pub fn register<T: Scalar>(store: &mut ParamStore<T>, name: &str, d: usize, d_ff: usize) -> Self {
        Self {
            norm: LayerNorm::register(store, &format!("{name}.ln"), d),
            up: Linear::register(store, &format!("{name}.up"), d, d_ff),
            down: Linear::register(store, &format!("{name}.down"), d_ff, d),
        }
    }

    pub fn forward<T: Scalar>(&self, p: &ParamStore<T>, x: &[T]) -> (Vec<T>, FfCache<T>) {
        let rows = x.len() / self.norm.d;
        let (h, norm) = self.norm.forward(p, x);
        let mut act = self.up.forward(p, &h, rows);
        act.iter_mut().for_each(|a| *a = a.max(T::zero()));
        let out = self.down.forward(p, &act, rows);
        (crate::linalg::add(x, &out), FfCache { norm, h, act })
    }

    pub fn backward<T: Scalar>(&self, p: &ParamStore<T>, g: &mut ParamStore<T>, c: &FfCache<T>, dy: &[T]) -> Vec<T> {
        let rows = dy.len() / self.norm.d;
        let mut da = self.down.backward(p, g, &c.act, dy, rows);
        for (x, a) in da.iter_mut().zip(&c.act) {
            if *a <= T::zero() {
                *x = T::zero();
            }
        }
        let dh = self.up.backward(p, g, &c.h, &da, rows);
        let mut dx = self.norm.backward(p, g, &c.norm, &dh);
        crate::linalg::add_assign(&mut dx, dy);
        dx
    }

    /// Sign pattern of the hidden pre-activations, for detecting ReLU kinks
    /// in finite-difference checks.
    pub fn active_pattern<T: Scalar>(c: &FfCache<T>) -> impl Iterator<Item = bool> + '_ {
        c.act.iter().map(|a| *a > T::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_norm_rows_are_standardized() {
        let mut s = ParamStore::<f64>::new();
        let ln = LayerNorm::register(&mut s, "ln", 4);
        s.get_mut(ln.gain).fill(1.0);
        let (y, _) = ln.forward(&s, &[1.0, 2.0, 3.0, 4.0, -5.0, 0.0, 5.0, 0.0]);
        for row in y.chunks(4) {
            let mean: f64 = row.iter().sum::<f64>() / 4.0;
            let var: f64 = row.iter().map(|v| v * v).sum::<f64>() / 4.0;
            assert!(mean.abs() < 1e-12);
            assert!((var - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn key_padding_zeroes_weights() {
        let s = AttnShape {
            batch: 2,
            tq: 2,
            tk: 3,
            heads: 1,
            dh: 2,
        };
        let q: Vec<f64> = (0..8).map(|x| x as f64 * 0.1).collect();
        let k: Vec<f64> = (0..12).map(|x| (x as f64).sin()).collect();
        let v = k.clone();
        let lens = [3, 1];
        let (_, probs) = attention_forward(
            &q,
            &k,
            &v,
            s,
            AttnMask {
                additive: None,
                key_len: Some(&lens),
            },
        );
        assert_eq!(&probs[6..], &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert!((probs[..3].iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
