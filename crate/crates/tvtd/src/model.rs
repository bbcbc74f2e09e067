//! The decoder network.
//!
//! Memory: `ln(enc*(Phi(r)))` where `Phi(r)` is the received word's statistic
//! pair followed by its symbol embedding and `enc*` is zero or more
//! bidirectional encoder layers over it.
//!
//! Decoder input token `t` (one-based) is a learned start vector for `t = 1`
//! and the target-side symbol embedding of bit `t - 1` otherwise, plus the
//! statistic embeddings of the prefix `1..t-1`. Each pre-norm layer runs
//! windowed causal self-attention, cross-attention to the memory and a ReLU
//! feed-forward. A final norm and a linear map give two logits per position.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use vt_core::BitWord;

use crate::config::TvtdConfig;
use crate::embed::{prefix_stats, symbol_row, EmbeddingTables, Table};
use crate::error::TvtdError;
use crate::layers::{AttnBlock, AttnCache, AttnMask, AttnShape, FfBlock, FfCache, LayerNorm, Linear, MultiHead, NormCache};
use crate::linalg::Scalar;
use crate::mask::build_masks;
use crate::params::{ParamId, ParamStore};

/// One training or evaluation pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub received: BitWord,
    /// Transmitted codeword, `n` bits.
    pub target: BitWord,
}

impl Sample {
    pub fn new(received: BitWord, target: BitWord) -> Self {
        Self { received, target }
    }
}

pub(crate) struct EncLayer {
    pub attn: AttnBlock,
    pub ff: FfBlock,
}

pub(crate) struct DecLayer {
    pub self_attn: AttnBlock,
    pub cross: AttnBlock,
    pub ff: FfBlock,
}

pub(crate) struct SideTables {
    pub sym: ParamId,
    pub stats: Option<(ParamId, ParamId)>,
}

pub(crate) struct Layout {
    pub src: SideTables,
    pub tgt: SideTables,
    pub start: ParamId,
    pub enc: Vec<EncLayer>,
    pub mem_norm: LayerNorm,
    pub dec: Vec<DecLayer>,
    pub final_norm: LayerNorm,
    pub out: Linear,
}

fn attn_block<T: Scalar>(store: &mut ParamStore<T>, name: &str, d: usize) -> AttnBlock {
    AttnBlock {
        norm: LayerNorm::register(store, &format!("{name}.ln"), d),
        mh: MultiHead::register(store, name, d),
    }
}

impl Layout {
    fn register<T: Scalar>(cfg: &TvtdConfig, store: &mut ParamStore<T>) -> Self {
        let d = cfg.d_model;
        let sym_rows = 2 * cfg.max_positions();
        let keys = cfg.max_stat_key() + 1;
        let side = |store: &mut ParamStore<T>, prefix: &str, stats: bool| SideTables {
            sym: store.add(format!("{prefix}.sym"), &[sym_rows, d]),
            stats: stats.then(|| {
                (
                    store.add(format!("{prefix}.stat0"), &[keys, d]),
                    store.add(format!("{prefix}.stat1"), &[keys, d]),
                )
            }),
        };
        let src = side(store, "src", cfg.memory_stats);
        let tgt = side(store, "tgt", cfg.target_stats);
        let start = store.add("tgt.start", &[1, d]);
        let enc = (0..cfg.n_enc_layers)
            .map(|i| EncLayer {
                attn: attn_block(store, &format!("enc{i}.self"), d),
                ff: FfBlock::register(store, &format!("enc{i}.ff"), d, cfg.d_ff()),
            })
            .collect();
        let mem_norm = LayerNorm::register(store, "mem.ln", d);
        let dec = (0..cfg.n_layers)
            .map(|i| DecLayer {
                self_attn: attn_block(store, &format!("dec{i}.self"), d),
                cross: attn_block(store, &format!("dec{i}.cross"), d),
                ff: FfBlock::register(store, &format!("dec{i}.ff"), d, cfg.d_ff()),
            })
            .collect();
        let final_norm = LayerNorm::register(store, "final.ln", d);
        let out = Linear::register(store, "out", d, 2);
        Self {
            src,
            tgt,
            start,
            enc,
            mem_norm,
            dec,
            final_norm,
            out,
        }
    }
}

pub struct TvtdModel<T> {
    pub(crate) config: TvtdConfig,
    pub(crate) layout: Layout,
    pub(crate) params: ParamStore<T>,
}

impl<T: Scalar> std::fmt::Debug for TvtdModel<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TvtdModel")
            .field("config", &self.config)
            .field("params", &self.params.len())
            .finish()
    }
}

impl<T: Scalar> Clone for TvtdModel<T> {
    fn clone(&self) -> Self {
        let mut m = Self::zeroed(self.config.clone()).expect("valid config");
        m.params = self.params.clone();
        m
    }
}

/// Loss summary of one batch: mean per-bit cross-entropy and teacher-forced
/// token accuracy counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchStats {
    pub loss: f64,
    pub correct: usize,
    pub tokens: usize,
}

struct MemCache<T> {
    rows: Vec<Vec<(ParamId, usize)>>,
    len: usize,
    key_len: Vec<usize>,
    enc: Vec<(AttnCache<T>, FfCache<T>)>,
    norm: NormCache<T>,
    mem: Vec<T>,
}

pub(crate) struct ForwardCache<T> {
    batch: usize,
    memory: MemCache<T>,
    tokens: Vec<Vec<Vec<(ParamId, usize)>>>,
    dec: Vec<(AttnCache<T>, AttnCache<T>, FfCache<T>)>,
    final_norm: NormCache<T>,
    final_h: Vec<T>,
}

impl<T: Scalar> TvtdModel<T> {
    /// All parameters zero except norm gains (1).
    pub fn zeroed(config: TvtdConfig) -> Result<Self, TvtdError> {
        config.validate()?;
        let mut params = ParamStore::new();
        let layout = Layout::register(&config, &mut params);
        for id in params.ids().collect::<Vec<_>>() {
            if params.info(id).name.ends_with(".ln.g") {
                params.get_mut(id).fill(T::one());
            }
        }
        Ok(Self {
            config,
            layout,
            params,
        })
    }

    /// Embedding tables and the start vector `N(0, 1)`, linear weights
    /// `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`, biases 0, norm gains 1.
    pub fn new(config: TvtdConfig, seed: u64) -> Result<Self, TvtdError> {
        let mut model = Self::zeroed(config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for id in model.params.ids().collect::<Vec<_>>() {
            let info = model.params.info(id).clone();
            let dst = model.params.get_mut(id);
            if info.name.starts_with("src.") || info.name.starts_with("tgt.") {
                for x in dst.iter_mut() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *x = T::of(z);
                }
            } else if info.name.ends_with(".w") {
                let bound = 1.0 / (info.shape[0] as f64).sqrt();
                let dist = Uniform::new_inclusive(-bound, bound);
                for x in dst.iter_mut() {
                    *x = T::of(rng.sample(dist));
                }
            }
        }
        Ok(model)
    }

    pub fn config(&self) -> &TvtdConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamStore<T> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore<T> {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    fn tables(&self, side: &SideTables) -> EmbeddingTables<'_, T> {
        EmbeddingTables {
            d_model: self.config.d_model,
            symbol: self.params.get(side.sym),
            stat0: side.stats.map(|(a, _)| self.params.get(a)),
            stat1: side.stats.map(|(_, b)| self.params.get(b)),
            positions: self.config.max_positions(),
            max_key: self.config.max_stat_key(),
        }
    }

    /// Tables used for the received word (decoder memory).
    pub fn source_tables(&self) -> EmbeddingTables<'_, T> {
        self.tables(&self.layout.src)
    }

    /// Tables used for the decoder's own input tokens.
    pub fn target_tables(&self) -> EmbeddingTables<'_, T> {
        self.tables(&self.layout.tgt)
    }

    fn table_id(side: &SideTables, table: Table) -> ParamId {
        match table {
            Table::Symbol => side.sym,
            Table::Stat0 => side.stats.expect("statistics enabled").0,
            Table::Stat1 => side.stats.expect("statistics enabled").1,
        }
    }

    pub(crate) fn gather(&self, rows: &[(ParamId, usize)], out: &mut [T]) {
        let d = self.config.d_model;
        for &(id, r) in rows {
            let src = &self.params.get(id)[r * d..(r + 1) * d];
            for (o, s) in out.iter_mut().zip(src) {
                *o = *o + *s;
            }
        }
    }

    fn scatter(&self, rows: &[(ParamId, usize)], grad: &[T], g: &mut ParamStore<T>) {
        let d = self.config.d_model;
        for &(id, r) in rows {
            let dst = &mut g.get_mut(id)[r * d..(r + 1) * d];
            for (o, s) in dst.iter_mut().zip(grad) {
                *o = *o + *s;
            }
        }
    }

    /// Table rows summed into decoder input token `t` (zero-based), given
    /// the previous bit (`None` for the first token) and prefix statistics.
    pub(crate) fn token_rows(&self, t: usize, prev_bit: Option<u8>, stats: (usize, usize)) -> Vec<(ParamId, usize)> {
        let mut rows = Vec::with_capacity(3);
        match prev_bit {
            None => rows.push((self.layout.start, 0)),
            Some(b) => rows.push((self.layout.tgt.sym, symbol_row(t, b))),
        }
        if let Some((s0, s1)) = self.layout.tgt.stats {
            rows.push((s0, stats.0));
            rows.push((s1, stats.1));
        }
        rows
    }

    fn target_token_rows(&self, target: &BitWord) -> Result<Vec<Vec<(ParamId, usize)>>, TvtdError> {
        let n = self.config.n;
        if target.len() != n {
            return Err(TvtdError::TargetLength {
                expected: n,
                found: target.len(),
            });
        }
        let stats = prefix_stats(target);
        Ok((0..n)
            .map(|t| self.token_rows(t, (t > 0).then(|| target.bit(t)), stats[t]))
            .collect())
    }

    /// Embeds and encodes a batch of received words into a padded
    /// `batch x len x d` memory.
    fn encode_memory(&self, received: &[&BitWord]) -> Result<MemCache<T>, TvtdError> {
        let d = self.config.d_model;
        let tables = self.source_tables();
        let rows = received
            .iter()
            .map(|w| {
                tables.memory_rows(w).map(|rs| {
                    rs.into_iter()
                        .map(|(t, r)| (Self::table_id(&self.layout.src, t), r))
                        .collect::<Vec<_>>()
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let key_len: Vec<usize> = rows.iter().map(Vec::len).collect();
        let len = key_len.iter().copied().max().unwrap_or(0).max(1);
        let batch = received.len();
        let mut x = vec![T::zero(); batch * len * d];
        for (b, rs) in rows.iter().enumerate() {
            for (i, row) in rs.iter().enumerate() {
                let off = (b * len + i) * d;
                self.gather(std::slice::from_ref(row), &mut x[off..off + d]);
            }
        }
        let shape = AttnShape {
            batch,
            tq: len,
            tk: len,
            heads: self.config.n_heads,
            dh: self.config.head_dim(),
        };
        let mut enc = Vec::with_capacity(self.layout.enc.len());
        for layer in &self.layout.enc {
            let mask = AttnMask {
                additive: None,
                key_len: Some(&key_len),
            };
            let (y, ac) = layer.attn.forward(&self.params, &x, None, shape, mask);
            let (y, fc) = layer.ff.forward(&self.params, &y);
            x = y;
            enc.push((ac, fc));
        }
        let (mem, norm) = self.layout.mem_norm.forward(&self.params, &x);
        Ok(MemCache {
            rows,
            len,
            key_len,
            enc,
            norm,
            mem,
        })
    }

    /// `(memory, padded length, valid lengths)`.
    pub(crate) fn encode_memory_for_inference(
        &self,
        received: &[&BitWord],
    ) -> Result<(Vec<T>, usize, Vec<usize>), TvtdError> {
        let c = self.encode_memory(received)?;
        Ok((c.mem, c.len, c.key_len))
    }

    /// Teacher-forced logits, `batch x n x 2` flattened, plus the cache for
    /// [`Self::backward`].
    pub(crate) fn forward_batch(&self, samples: &[Sample]) -> Result<(Vec<T>, ForwardCache<T>), TvtdError> {
        let cfg = &self.config;
        let (n, d) = (cfg.n, cfg.d_model);
        let batch = samples.len();
        let received: Vec<&BitWord> = samples.iter().map(|s| &s.received).collect();
        let memory = self.encode_memory(&received)?;
        let tokens = samples
            .iter()
            .map(|s| self.target_token_rows(&s.target))
            .collect::<Result<Vec<_>, _>>()?;
        let mut x = vec![T::zero(); batch * n * d];
        for (b, toks) in tokens.iter().enumerate() {
            for (t, rows) in toks.iter().enumerate() {
                let off = (b * n + t) * d;
                self.gather(rows, &mut x[off..off + d]);
            }
        }
        let self_mask = build_masks::<T>(n, cfg.window);
        let self_shape = AttnShape {
            batch,
            tq: n,
            tk: n,
            heads: cfg.n_heads,
            dh: cfg.head_dim(),
        };
        let cross_shape = AttnShape {
            tk: memory.len,
            ..self_shape
        };
        let mut dec = Vec::with_capacity(self.layout.dec.len());
        for layer in &self.layout.dec {
            let (y, sc) = layer.self_attn.forward(
                &self.params,
                &x,
                None,
                self_shape,
                AttnMask {
                    additive: Some(&self_mask),
                    key_len: None,
                },
            );
            let (y, cc) = layer.cross.forward(
                &self.params,
                &y,
                Some(&memory.mem),
                cross_shape,
                AttnMask {
                    additive: None,
                    key_len: Some(&memory.key_len),
                },
            );
            let (y, fc) = layer.ff.forward(&self.params, &y);
            x = y;
            dec.push((sc, cc, fc));
        }
        let (final_h, final_norm) = self.layout.final_norm.forward(&self.params, &x);
        let logits = self.layout.out.forward(&self.params, &final_h, batch * n);
        Ok((
            logits,
            ForwardCache {
                batch,
                memory,
                tokens,
                dec,
                final_norm,
                final_h,
            },
        ))
    }

    /// Gradient of the loss whose logit gradient is `dlogits`.
    pub(crate) fn backward(&self, cache: &ForwardCache<T>, dlogits: &[T]) -> ParamStore<T> {
        let cfg = &self.config;
        let (n, d) = (cfg.n, cfg.d_model);
        let p = &self.params;
        let mut g = p.zeros_like();
        let rows = cache.batch * n;
        let dh = self.layout.out.backward(p, &mut g, &cache.final_h, dlogits, rows);
        let mut dx = self.layout.final_norm.backward(p, &mut g, &cache.final_norm, &dh);
        let mut dmem = vec![T::zero(); cache.memory.mem.len()];
        for (layer, (sc, cc, fc)) in self.layout.dec.iter().zip(&cache.dec).rev() {
            let dy = layer.ff.backward(p, &mut g, fc, &dx);
            let dy = layer
                .cross
                .backward(p, &mut g, cc, &dy, Some((&cache.memory.mem, &mut dmem)));
            dx = layer.self_attn.backward(p, &mut g, sc, &dy, None);
        }
        for (b, toks) in cache.tokens.iter().enumerate() {
            for (t, rows) in toks.iter().enumerate() {
                let off = (b * n + t) * d;
                self.scatter(rows, &dx[off..off + d], &mut g);
            }
        }
        let mc = &cache.memory;
        let mut dm = self.layout.mem_norm.backward(p, &mut g, &mc.norm, &dmem);
        for (layer, (ac, fc)) in self.layout.enc.iter().zip(&mc.enc).rev() {
            let dy = layer.ff.backward(p, &mut g, fc, &dm);
            dm = layer.attn.backward(p, &mut g, ac, &dy, None);
        }
        for (b, rs) in mc.rows.iter().enumerate() {
            for (i, row) in rs.iter().enumerate() {
                let off = (b * mc.len + i) * d;
                self.scatter(std::slice::from_ref(row), &dm[off..off + d], &mut g);
            }
        }
        g
    }

    /// Teacher-forced logits for one pair: `n` rows of `[logit_0, logit_1]`.
    pub fn forward(&self, received: &BitWord, teacher: &BitWord) -> Result<Vec<[T; 2]>, TvtdError> {
        let (logits, _) = self.forward_batch(&[Sample::new(received.clone(), teacher.clone())])?;
        Ok(logits.chunks_exact(2).map(|c| [c[0], c[1]]).collect())
    }

    /// Mean cross-entropy and `d loss / d logits` for a batch.
    fn cross_entropy(&self, logits: &[T], samples: &[Sample]) -> (BatchStats, Vec<T>) {
        let n = self.config.n;
        let tokens = samples.len() * n;
        let inv = T::one() / T::of(tokens as f64);
        let mut dlogits = vec![T::zero(); logits.len()];
        let mut loss = 0.0f64;
        let mut correct = 0;
        for (b, s) in samples.iter().enumerate() {
            for t in 0..n {
                let i = b * n + t;
                let (l0, l1) = (logits[2 * i], logits[2 * i + 1]);
                let y = usize::from(s.target.bit(t + 1));
                let mx = l0.max(l1);
                let lse = mx + ((l0 - mx).exp() + (l1 - mx).exp()).ln();
                let ly = if y == 0 { l0 } else { l1 };
                loss += (lse - ly).to_f64().unwrap_or(f64::NAN);
                let p1 = (l1 - lse).exp();
                let p0 = (l0 - lse).exp();
                dlogits[2 * i] = (p0 - if y == 0 { T::one() } else { T::zero() }) * inv;
                dlogits[2 * i + 1] = (p1 - if y == 1 { T::one() } else { T::zero() }) * inv;
                let pred = usize::from(l1 > l0);
                correct += usize::from(pred == y);
            }
        }
        (
            BatchStats {
                loss: loss / tokens as f64,
                correct,
                tokens,
            },
            dlogits,
        )
    }

    pub fn loss(&self, samples: &[Sample]) -> Result<BatchStats, TvtdError> {
        let (logits, _) = self.forward_batch(samples)?;
        Ok(self.cross_entropy(&logits, samples).0)
    }

    pub fn loss_and_grad(&self, samples: &[Sample]) -> Result<(BatchStats, ParamStore<T>), TvtdError> {
        let (logits, cache) = self.forward_batch(samples)?;
        let (stats, dlogits) = self.cross_entropy(&logits, samples);
        Ok((stats, self.backward(&cache, &dlogits)))
    }

    /// Which feed-forward units are active for this batch. Finite
    /// differences are only meaningful when a perturbation leaves this
    /// pattern unchanged.
    pub fn activation_pattern(&self, samples: &[Sample]) -> Result<Vec<bool>, TvtdError> {
        let (_, cache) = self.forward_batch(samples)?;
        let mut out = Vec::new();
        for (_, fc) in &cache.memory.enc {
            out.extend(FfBlock::active_pattern(fc));
        }
        for (_, _, fc) in &cache.dec {
            out.extend(FfBlock::active_pattern(fc));
        }
        Ok(out)
    }

    /// Fraction of target bits predicted correctly under teacher forcing.
    pub fn teacher_forced_accuracy(&self, samples: &[Sample], batch: usize) -> Result<f64, TvtdError> {
        let mut correct = 0;
        let mut tokens = 0;
        for chunk in samples.chunks(batch.max(1)) {
            let s = self.loss(chunk)?;
            correct += s.correct;
            tokens += s.tokens;
        }
        Ok(correct as f64 / tokens.max(1) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> TvtdConfig {
        TvtdConfig {
            d_model: 8,
            n_heads: 2,
            n_layers: 2,
            max_drift: 2,
            ..TvtdConfig::desk(6)
        }
    }

    fn w(s: &str) -> BitWord {
        s.parse().unwrap()
    }

    #[test]
    fn parameter_count_is_a_function_of_config() {
        let cfg = tiny();
        let a = TvtdModel::<f32>::new(cfg.clone(), 1).unwrap();
        let b = TvtdModel::<f32>::new(cfg.clone(), 2).unwrap();
        assert_eq!(a.param_count(), b.param_count());
        let d = 8;
        let sym = 2 * 8 * d;
        let stat = 37 * d;
        let attn = 4 * (d * d + d) + 2 * d;
        let ff = 2 * d + d * 4 * d + 4 * d + 4 * d * d + d;
        let expected = 2 * (sym + 2 * stat) + d + 2 * d + 2 * (2 * attn + ff) + 2 * d + 2 * d + 2;
        assert_eq!(a.param_count(), expected);
        let ablated = TvtdConfig {
            memory_stats: false,
            target_stats: false,
            ..cfg
        };
        assert_eq!(
            TvtdModel::<f32>::new(ablated, 1).unwrap().param_count(),
            expected - 4 * stat
        );
    }

    #[test]
    fn logits_have_shape_n_by_two() {
        let m = TvtdModel::<f64>::new(tiny(), 3).unwrap();
        for r in ["", "0", "101101", "10110111"] {
            let out = m.forward(&w(r), &w("101101")).unwrap();
            assert_eq!(out.len(), 6);
            assert!(out.iter().flatten().all(|v| v.is_finite()));
        }
        assert!(matches!(
            m.forward(&w("101101101"), &w("101101")),
            Err(TvtdError::LengthOverflow { len: 9, max: 8 })
        ));
        assert!(matches!(
            m.forward(&w("101101"), &w("10110")),
            Err(TvtdError::TargetLength { .. })
        ));
    }

    #[test]
    fn padding_does_not_leak_across_the_batch() {
        let cfg = TvtdConfig {
            n_enc_layers: 1,
            ..tiny()
        };
        let m = TvtdModel::<f64>::new(cfg, 4).unwrap();
        let a = Sample::new(w("10"), w("101101"));
        let b = Sample::new(w("10110111"), w("000111"));
        let (alone, _) = m.forward_batch(std::slice::from_ref(&a)).unwrap();
        let (both, _) = m.forward_batch(&[a, b]).unwrap();
        for (x, y) in alone.iter().zip(&both[..12]) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
