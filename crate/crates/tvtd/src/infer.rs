//! Greedy autoregressive decoding.
//!
//! One token per step for `n` steps. Self-attention keys and values of past
//! tokens are cached per layer, and token `t` attends only to the cached
//! tokens `t - w ..= t`, exactly as under the training mask, so every step
//! reproduces the teacher-forced computation on the generated prefix. Memory
//! keys and values are computed once per word.

use vt_core::BitWord;

use crate::error::TvtdError;
use crate::linalg::{softmax_rows, Scalar};
use crate::model::TvtdModel;

struct LayerCache<T> {
    /// Per step, `batch x d`.
    self_k: Vec<Vec<T>>,
    self_v: Vec<Vec<T>>,
    mem_k: Vec<T>,
    mem_v: Vec<T>,
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

impl<T: Scalar> TvtdModel<T> {
    /// Decodes one received word to `n` bits.
    pub fn infer(&self, received: &BitWord) -> Result<BitWord, TvtdError> {
        Ok(self.infer_batch(std::slice::from_ref(received))?.remove(0))
    }

    /// Decodes several words in lockstep; results equal per-word [`Self::infer`].
    pub fn infer_batch(&self, received: &[BitWord]) -> Result<Vec<BitWord>, TvtdError> {
        let cfg = &self.config;
        let (n, d, heads, dh) = (cfg.n, cfg.d_model, cfg.n_heads, cfg.head_dim());
        let batch = received.len();
        if batch == 0 {
            return Ok(Vec::new());
        }
        let p = &self.params;
        let refs: Vec<&BitWord> = received.iter().collect();
        let memory = self.encode_memory_for_inference(&refs)?;
        let (mem, mem_len, key_len) = (memory.0, memory.1, memory.2);
        let mut caches: Vec<LayerCache<T>> = self
            .layout
            .dec
            .iter()
            .map(|layer| LayerCache {
                self_k: Vec::with_capacity(n),
                self_v: Vec::with_capacity(n),
                mem_k: layer.cross.mh.k.forward(p, &mem, batch * mem_len),
                mem_v: layer.cross.mh.v.forward(p, &mem, batch * mem_len),
            })
            .collect();
        let scale = T::one() / T::of(dh as f64).sqrt();
        let mut out = vec![BitWord::new(); batch];
        let mut stats = vec![(0usize, 0usize); batch];
        let mut scores = Vec::with_capacity(n.max(mem_len));
        for t in 0..n {
            let mut x = vec![T::zero(); batch * d];
            for b in 0..batch {
                let prev = (t > 0).then(|| out[b].bit(t));
                let rows = self.token_rows(t, prev, stats[b]);
                self.gather(&rows, &mut x[b * d..(b + 1) * d]);
            }
            let first = t.saturating_sub(cfg.window);
            for (layer, cache) in self.layout.dec.iter().zip(caches.iter_mut()) {
                let sa = &layer.self_attn;
                let (h, _) = sa.norm.forward(p, &x);
                let q = sa.mh.q.forward(p, &h, batch);
                cache.self_k.push(sa.mh.k.forward(p, &h, batch));
                cache.self_v.push(sa.mh.v.forward(p, &h, batch));
                let mut ctx = vec![T::zero(); batch * d];
                for b in 0..batch {
                    for hd in 0..heads {
                        let off = b * d + hd * dh;
                        let qh = &q[off..off + dh];
                        scores.clear();
                        scores.extend((first..=t).map(|j| scale * dot(qh, &cache.self_k[j][off..off + dh])));
                        softmax_rows(&mut scores, t + 1 - first);
                        let c = &mut ctx[off..off + dh];
                        for (j, &w) in (first..=t).zip(scores.iter()) {
                            for (ci, vi) in c.iter_mut().zip(&cache.self_v[j][off..off + dh]) {
                                *ci = *ci + w * *vi;
                            }
                        }
                    }
                }
                let o = sa.mh.o.forward(p, &ctx, batch);
                crate::linalg::add_assign(&mut x, &o);

                let ca = &layer.cross;
                let (h, _) = ca.norm.forward(p, &x);
                let q = ca.mh.q.forward(p, &h, batch);
                let mut ctx = vec![T::zero(); batch * d];
                for b in 0..batch {
                    for hd in 0..heads {
                        let off = b * d + hd * dh;
                        let qh = &q[off..off + dh];
                        let mrow = |j: usize| (b * mem_len + j) * d + hd * dh;
                        scores.clear();
                        scores.extend((0..key_len[b]).map(|j| scale * dot(qh, &cache.mem_k[mrow(j)..mrow(j) + dh])));
                        if scores.is_empty() {
                            continue;
                        }
                        softmax_rows(&mut scores, key_len[b]);
                        let c = &mut ctx[off..off + dh];
                        for (j, &w) in scores.iter().enumerate() {
                            for (ci, vi) in c.iter_mut().zip(&cache.mem_v[mrow(j)..mrow(j) + dh]) {
                                *ci = *ci + w * *vi;
                            }
                        }
                    }
                }
                let o = ca.mh.o.forward(p, &ctx, batch);
                crate::linalg::add_assign(&mut x, &o);

                let (y, _) = layer.ff.forward(p, &x);
                x = y;
            }
            let (h, _) = self.layout.final_norm.forward(p, &x);
            let logits = self.layout.out.forward(p, &h, batch);
            for b in 0..batch {
                // Ties decode to 0.
                let bit = u8::from(logits[2 * b + 1] > logits[2 * b]);
                out[b].push(bit);
                if bit == 0 {
                    stats[b].0 += t + 1;
                } else {
                    stats[b].1 += t + 1;
                }
            }
        }
        Ok(out)
    }
}
