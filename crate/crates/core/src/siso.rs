//! Soft-in soft-out bitwise MAP decoding on the joint (syndrome, drift) trellis.
//!
//! The hidden state after `t` transmitted bits is `(s, d)`: `s` is the running
//! checksum `sum_{i<=t} i * v_i mod m` and `d` the drift (#insertions minus
//! #deletions so far), so that `t + d` received symbols have been consumed.
//! Every transmitted bit goes through exactly one of
//!
//! * transmit: emit `v_t` (prob `1 - p_ins - p_del - p_sub`) or its
//!   complement (prob `p_sub`), drift unchanged;
//! * delete: emit nothing (prob `p_del`), drift `-1`;
//! * insert: emit a uniform bit, then `v_t` (prob `p_ins`), drift `+1`;
//!
//! and after the last bit one trailing uniform bit is inserted with
//! probability `p_ins`. This is the generative story of
//! [`crate::channel::corrupt_iid`]. Paths must end in checksum `a`, so the
//! hypotheses are exactly the members of the code.
//!
//! All arithmetic is in the log domain. LLRs follow the usual convention
//! `L(v_t) = log Pr[v_t = 0 | r] - log Pr[v_t = 1 | r]`; positive favors 0.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitWord;
use crate::channel::{ChannelMode, ChannelSpec};
use crate::code::VtParams;
use crate::hd::fallback_word;

const LN_HALF: f64 = -std::f64::consts::LN_2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SisoError {
    #[error("received length {received} is {drift} away from n, beyond drift bound {bound}")]
    DriftExceeded { received: usize, drift: usize, bound: usize },
    #[error("no trellis path explains the received word")]
    NoValidPath,
    #[error("exhaustive oracle limited to n <= 12, got {0}")]
    SizeLimit(usize),
    #[error("invalid channel prior: {0}")]
    InvalidPrior(String),
    #[error("expected {expected} a-priori LLRs, got {found}")]
    AprioriLength { expected: usize, found: usize },
}

/// Per-position event probabilities assumed by the decoder plus the drift
/// window `[-drift_bound, drift_bound]` it tracks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelPrior {
    pub p_ins: f64,
    pub p_del: f64,
    pub p_sub: f64,
    pub drift_bound: usize,
}

impl ChannelPrior {
    pub fn new(p_ins: f64, p_del: f64, p_sub: f64, drift_bound: usize) -> Result<Self, SisoError> {
        let probs = [p_ins, p_del, p_sub];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) || p_ins + p_del + p_sub > 1.0 + 1e-12 {
            return Err(SisoError::InvalidPrior(format!(
                "p_ins={p_ins} p_del={p_del} p_sub={p_sub}"
            )));
        }
        Ok(Self {
            p_ins,
            p_del,
            p_sub,
            drift_bound,
        })
    }

    /// Decoder prior matched to a channel: i.i.d. channels split `rate` by the
    /// type weights, a fixed count `k` is spread as a per-position rate
    /// `k / n`. The drift window is `max(4, |N - n| + 2)`.
    pub fn from_channel(spec: &ChannelSpec, n: usize, received_len: usize) -> Self {
        let rate = match spec.mode {
            ChannelMode::Iid { rate } => rate,
            ChannelMode::FixedCount { k } => (k as f64 / n as f64).min(1.0),
        };
        let [wi, wd, ws] = spec.type_weights;
        Self {
            p_ins: rate * wi,
            p_del: rate * wd,
            p_sub: rate * ws,
            drift_bound: 4.max(received_len.abs_diff(n) + 2),
        }
    }

    fn ln_transmit(&self) -> f64 {
        (1.0 - self.p_ins - self.p_del - self.p_sub).max(0.0).ln()
    }
}

/// One node of the trellis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrellisState {
    /// Running checksum in `[0, m)`.
    pub s: usize,
    /// Drift in `[-drift_bound, drift_bound]`.
    pub d: isize,
}

/// Per-bit log-posterior ratios, `+inf`/`-inf` for certain bits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LlrVector(pub Vec<f64>);

impl LlrVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// `0` for non-negative LLRs (ties decode to 0), `1` otherwise.
    pub fn hard_decision(&self) -> BitWord {
        self.0.iter().map(|&l| u8::from(l < 0.0)).collect()
    }
}

/// Everything the forward-backward pass learns about one received word.
#[derive(Debug, Clone)]
pub struct SisoPosterior {
    pub llr: LlrVector,
    /// `log Pr[r, v_t = b]` per position, `b` in `{0, 1}`.
    pub log_joint: Vec<[f64; 2]>,
    /// `log Pr[r]` from the terminal forward messages.
    pub log_evidence: f64,
    /// `log Pr[r]` from the initial backward message.
    pub log_evidence_backward: f64,
}

#[derive(Debug, Clone)]
pub struct SisoOutcome {
    pub decoded: BitWord,
    pub llr: LlrVector,
    /// The word had no explanation under the prior (or drifted too far) and
    /// `decoded` is the truncate/zero-pad fallback.
    pub fallback: bool,
}

/// `log(exp(x_1) + ... )`, exact for `-inf` entries.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

fn ln_bit_prior(apriori_llr: f64, bit: u8) -> f64 {
    // log sigma(+-L)
    let x = if bit == 0 { apriori_llr } else { -apriori_llr };
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Log branch metric `log Pr[emitted, next | prev]` for transmitting `bit` as
/// the `t`-th (one-based) code symbol, including the bit prior of 1/2.
/// Returns `-inf` for transitions the model forbids.
pub fn gamma(
    prev: TrellisState,
    next: TrellisState,
    bit: u8,
    emitted: &[u8],
    prior: &ChannelPrior,
    t: usize,
    m: usize,
) -> f64 {
    if next.s != (prev.s + t * usize::from(bit)) % m
        || next.d.unsigned_abs() > prior.drift_bound
        || prev.d.unsigned_abs() > prior.drift_bound
    {
        return f64::NEG_INFINITY;
    }
    let delta = next.d - prev.d;
    if !(-1..=1).contains(&delta) || emitted.len() as isize != delta + 1 {
        return f64::NEG_INFINITY;
    }
    LN_HALF + ln_emission(delta, bit, emitted, prior)
}

fn ln_emission(delta: isize, bit: u8, emitted: &[u8], prior: &ChannelPrior) -> f64 {
    match delta {
        -1 => prior.p_del.ln(),
        0 if emitted[0] == bit => prior.ln_transmit(),
        0 => prior.p_sub.ln(),
        _ if emitted[1] == bit => prior.p_ins.ln() + LN_HALF,
        _ => f64::NEG_INFINITY,
    }
}

struct Trellis<'a> {
    r: &'a [u8],
    m: usize,
    bound: isize,
    width: usize,
    ln_del: f64,
    ln_ok: f64,
    ln_sub: f64,
    ln_ins: f64,
}

impl<'a> Trellis<'a> {
    fn new(received: &'a BitWord, m: usize, prior: &ChannelPrior) -> Self {
        let bound = prior.drift_bound as isize;
        Self {
            r: received.as_slice(),
            m,
            bound,
            width: (2 * bound + 1) as usize,
            ln_del: prior.p_del.ln(),
            ln_ok: prior.ln_transmit(),
            ln_sub: prior.p_sub.ln(),
            ln_ins: prior.p_ins.ln() + LN_HALF,
        }
    }

    fn idx(&self, s: usize, d: isize) -> usize {
        s * self.width + (d + self.bound) as usize
    }

    /// Calls `f(d_next, s_next, ln_weight)` for every transition out of
    /// `(s, d)` at step `t` carrying `bit`, excluding the bit prior.
    #[inline]
    fn for_each_successor(&self, t: usize, s: usize, d: isize, bit: u8, mut f: impl FnMut(isize, usize, f64)) {
        let consumed = t as isize - 1 + d;
        if consumed < 0 || consumed as usize > self.r.len() {
            return;
        }
        let c = consumed as usize;
        let s_next = (s + t * usize::from(bit)) % self.m;
        if d > -self.bound {
            f(d - 1, s_next, self.ln_del);
        }
        if c < self.r.len() {
            let w = if self.r[c] == bit { self.ln_ok } else { self.ln_sub };
            f(d, s_next, w);
        }
        if d < self.bound && c + 1 < self.r.len() && self.r[c + 1] == bit {
            f(d + 1, s_next, self.ln_ins);
        }
    }

    /// Terminal weight `log Pr[tail | (s, d) at t = n]`.
    fn terminal(&self, n: usize, a: usize, s: usize, d: isize, ln_no_tail: f64) -> f64 {
        if s != a {
            return f64::NEG_INFINITY;
        }
        let excess = self.r.len() as isize - n as isize;
        if d == excess {
            ln_no_tail
        } else if d == excess - 1 {
            self.ln_ins
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// Forward-backward pass with uniform bit priors.
pub fn forward_backward(
    received: &BitWord,
    params: &VtParams,
    prior: &ChannelPrior,
) -> Result<SisoPosterior, SisoError> {
    forward_backward_with_apriori(received, params, prior, &vec![0.0; params.n()])
}

/// Forward-backward pass with per-bit a-priori LLRs (for use inside an
/// iterative scheme). The returned LLRs are a-posteriori values.
pub fn forward_backward_with_apriori(
    received: &BitWord,
    params: &VtParams,
    prior: &ChannelPrior,
    apriori_llr: &[f64],
) -> Result<SisoPosterior, SisoError> {
    let (n, m, a) = (params.n(), params.m(), params.a());
    if apriori_llr.len() != n {
        return Err(SisoError::AprioriLength {
            expected: n,
            found: apriori_llr.len(),
        });
    }
    let drift = received.len().abs_diff(n);
    if drift > prior.drift_bound {
        return Err(SisoError::DriftExceeded {
            received: received.len(),
            drift,
            bound: prior.drift_bound,
        });
    }
    let tr = Trellis::new(received, m, prior);
    let layer = m * tr.width;
    let ln_no_tail = (1.0 - prior.p_ins).ln();
    let bit_prior: Vec<[f64; 2]> = apriori_llr
        .iter()
        .map(|&l| [ln_bit_prior(l, 0), ln_bit_prior(l, 1)])
        .collect();

    // alpha[t] for t = 0..=n, flattened.
    let mut alpha = vec![f64::NEG_INFINITY; (n + 1) * layer];
    alpha[tr.idx(0, 0)] = 0.0;
    let mut incoming: Vec<Vec<f64>> = vec![Vec::with_capacity(6); layer];
    for t in 1..=n {
        for bucket in incoming.iter_mut() {
            bucket.clear();
        }
        let (prev, cur) = alpha[(t - 1) * layer..(t + 1) * layer].split_at_mut(layer);
        for s in 0..m {
            for d in -tr.bound..=tr.bound {
                let from = prev[tr.idx(s, d)];
                if from == f64::NEG_INFINITY {
                    continue;
                }
                for bit in 0..=1u8 {
                    let base = from + bit_prior[t - 1][bit as usize];
                    tr.for_each_successor(t, s, d, bit, |dn, sn, w| {
                        incoming[tr.idx(sn, dn)].push(base + w);
                    });
                }
            }
        }
        for (slot, bucket) in cur.iter_mut().zip(&incoming) {
            *slot = log_sum_exp(bucket);
        }
    }

    let final_terms: Vec<f64> = (0..m)
        .flat_map(|s| (-tr.bound..=tr.bound).map(move |d| (s, d)))
        .map(|(s, d)| alpha[n * layer + tr.idx(s, d)] + tr.terminal(n, a, s, d, ln_no_tail))
        .collect();
    let log_evidence = log_sum_exp(&final_terms);

    // Backward sweep, accumulating the per-bit joint on the way.
    let mut beta_next = vec![f64::NEG_INFINITY; layer];
    for s in 0..m {
        for d in -tr.bound..=tr.bound {
            beta_next[tr.idx(s, d)] = tr.terminal(n, a, s, d, ln_no_tail);
        }
    }
    let mut beta_prev = vec![f64::NEG_INFINITY; layer];
    let mut log_joint = vec![[f64::NEG_INFINITY; 2]; n];
    let mut joint_terms: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let mut outgoing = Vec::with_capacity(6);
    for t in (1..=n).rev() {
        joint_terms[0].clear();
        joint_terms[1].clear();
        let alpha_prev = &alpha[(t - 1) * layer..t * layer];
        for s in 0..m {
            for d in -tr.bound..=tr.bound {
                let i = tr.idx(s, d);
                outgoing.clear();
                for bit in 0..=1u8 {
                    let bp = bit_prior[t - 1][bit as usize];
                    let mark = outgoing.len();
                    tr.for_each_successor(t, s, d, bit, |dn, sn, w| {
                        outgoing.push(bp + w + beta_next[tr.idx(sn, dn)]);
                    });
                    if alpha_prev[i] > f64::NEG_INFINITY {
                        for &x in &outgoing[mark..] {
                            joint_terms[bit as usize].push(alpha_prev[i] + x);
                        }
                    }
                }
                beta_prev[i] = log_sum_exp(&outgoing);
            }
        }
        log_joint[t - 1] = [log_sum_exp(&joint_terms[0]), log_sum_exp(&joint_terms[1])];
        std::mem::swap(&mut beta_next, &mut beta_prev);
    }
    let log_evidence_backward = beta_next[tr.idx(0, 0)];

    if log_evidence == f64::NEG_INFINITY {
        return Err(SisoError::NoValidPath);
    }
    let llr = log_joint.iter().map(|[l0, l1]| l0 - l1).collect();
    Ok(SisoPosterior {
        llr: LlrVector(llr),
        log_joint,
        log_evidence,
        log_evidence_backward,
    })
}

/// Bitwise MAP decision. The output is not necessarily a codeword.
pub fn decode_siso(received: &BitWord, params: &VtParams, prior: &ChannelPrior) -> SisoOutcome {
    match forward_backward(received, params, prior) {
        Ok(post) => SisoOutcome {
            decoded: post.llr.hard_decision(),
            llr: post.llr,
            fallback: false,
        },
        Err(_) => SisoOutcome {
            decoded: fallback_word(received, params.n()),
            llr: LlrVector(vec![0.0; params.n()]),
            fallback: true,
        },
    }
}

/// `log Pr[received | v]` under the decoder's event model, by a plain
/// alignment recursion over (transmitted index, received index).
pub fn alignment_log_likelihood(codeword: &BitWord, received: &BitWord, prior: &ChannelPrior) -> f64 {
    let v = codeword.as_slice();
    let r = received.as_slice();
    let (n, big_n) = (v.len(), r.len());
    let bound = prior.drift_bound;
    let within = |t: usize, j: usize| t.abs_diff(j) <= bound;
    let ln_ok = prior.ln_transmit();
    let (ln_del, ln_sub, ln_ins) = (prior.p_del.ln(), prior.p_sub.ln(), prior.p_ins.ln() + LN_HALF);
    // f[t][j]: log Pr[first j received symbols | first t transmitted]
    let mut f = vec![vec![f64::NEG_INFINITY; big_n + 1]; n + 1];
    f[0][0] = 0.0;
    for t in 1..=n {
        for j in 0..=big_n {
            if !within(t, j) {
                continue;
            }
            let mut terms = [f64::NEG_INFINITY; 3];
            if within(t - 1, j) {
                terms[0] = f[t - 1][j] + ln_del;
            }
            if j >= 1 && within(t - 1, j - 1) {
                let w = if r[j - 1] == v[t - 1] { ln_ok } else { ln_sub };
                terms[1] = f[t - 1][j - 1] + w;
            }
            if j >= 2 && within(t - 1, j - 2) && r[j - 1] == v[t - 1] {
                terms[2] = f[t - 1][j - 2] + ln_ins;
            }
            f[t][j] = log_sum_exp(&terms);
        }
    }
    let mut tail = vec![f[n][big_n] + (1.0 - prior.p_ins).ln()];
    if big_n >= 1 && within(n, big_n - 1) {
        tail.push(f[n][big_n - 1] + ln_ins);
    }
    log_sum_exp(&tail)
}

/// Exact bitwise posterior by enumerating the whole code. Independent of the
/// trellis: it never forms syndrome states, only per-codeword likelihoods.
pub fn exact_map_oracle(
    received: &BitWord,
    params: &VtParams,
    prior: &ChannelPrior,
) -> Result<SisoPosterior, SisoError> {
    let n = params.n();
    if n > 12 {
        return Err(SisoError::SizeLimit(n));
    }
    let ln_word_prior = n as f64 * LN_HALF;
    let mut per_bit: Vec<[Vec<f64>; 2]> = vec![[Vec::new(), Vec::new()]; n];
    let mut all = Vec::new();
    for v in params.codebook() {
        let ll = alignment_log_likelihood(&v, received, prior) + ln_word_prior;
        all.push(ll);
        for (t, b) in v.iter().enumerate() {
            per_bit[t][b as usize].push(ll);
        }
    }
    let log_evidence = log_sum_exp(&all);
    if log_evidence == f64::NEG_INFINITY {
        return Err(SisoError::NoValidPath);
    }
    let log_joint: Vec<[f64; 2]> = per_bit
        .iter()
        .map(|[z, o]| [log_sum_exp(z), log_sum_exp(o)])
        .collect();
    Ok(SisoPosterior {
        llr: LlrVector(log_joint.iter().map(|[a, b]| a - b).collect()),
        log_joint,
        log_evidence,
        log_evidence_backward: log_evidence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> BitWord {
        s.parse().unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a.is_infinite() && a == b) || (a - b).abs() < 1e-9
    }

    #[test]
    fn prior_from_channel() {
        let p = ChannelPrior::from_channel(&ChannelSpec::iid(0.03).unwrap(), 20, 20);
        assert!((p.p_ins - 0.01).abs() < 1e-15 && (p.p_del - 0.01).abs() < 1e-15);
        assert!((p.p_sub - 0.01).abs() < 1e-15);
        assert_eq!(p.drift_bound, 4);
        let p = ChannelPrior::from_channel(&ChannelSpec::fixed(2), 20, 23);
        assert!((p.p_ins - 1.0 / 30.0).abs() < 1e-15);
        assert_eq!(p.drift_bound, 5);
        let p = ChannelPrior::from_channel(&ChannelSpec::fixed(0), 20, 20);
        assert_eq!((p.p_ins, p.p_del, p.p_sub), (0.0, 0.0, 0.0));
    }

    #[test]
    fn prior_validation() {
        assert!(ChannelPrior::new(0.5, 0.5, 0.1, 4).is_err());
        assert!(ChannelPrior::new(-0.1, 0.0, 0.0, 4).is_err());
        assert!(ChannelPrior::new(0.1, 0.1, 0.1, 4).is_ok());
    }

    #[test]
    fn gamma_examples() {
        let noiseless = ChannelPrior::new(0.0, 0.0, 0.0, 4).unwrap();
        let s0 = TrellisState { s: 0, d: 0 };
        let next = TrellisState { s: 3, d: 0 };
        assert!(close(gamma(s0, next, 1, &[1], &noiseless, 3, 21), LN_HALF));
        assert_eq!(gamma(s0, next, 1, &[0], &noiseless, 3, 21), f64::NEG_INFINITY);

        let sub_only = ChannelPrior::new(0.0, 0.0, 0.01, 4).unwrap();
        assert!(close(gamma(s0, next, 1, &[1], &sub_only, 3, 21), (0.5f64 * 0.99).ln()));

        let all = ChannelPrior::new(0.01, 0.01, 0.01, 4).unwrap();
        assert!(close(gamma(s0, next, 1, &[1], &all, 3, 21), (0.5f64 * 0.97).ln()));
        assert!(close(gamma(s0, next, 1, &[0], &all, 3, 21), (0.5f64 * 0.01).ln()));
        let del = TrellisState { s: 3, d: -1 };
        assert!(close(gamma(s0, del, 1, &[], &all, 3, 21), (0.5f64 * 0.01).ln()));
        let ins = TrellisState { s: 3, d: 1 };
        assert!(close(gamma(s0, ins, 1, &[0, 1], &all, 3, 21), (0.5f64 * 0.01 * 0.5).ln()));
        assert_eq!(gamma(s0, ins, 1, &[1, 0], &all, 3, 21), f64::NEG_INFINITY);
        // Wrong syndrome update or inconsistent segment length.
        assert_eq!(gamma(s0, TrellisState { s: 4, d: 0 }, 1, &[1], &all, 3, 21), f64::NEG_INFINITY);
        assert_eq!(gamma(s0, next, 1, &[1, 1], &all, 3, 21), f64::NEG_INFINITY);
        assert_eq!(gamma(s0, TrellisState { s: 3, d: 2 }, 1, &[0, 1, 1], &all, 3, 21), f64::NEG_INFINITY);
    }

    #[test]
    fn noiseless_codeword_gives_certain_llrs() {
        let params = VtParams::with_length(10).unwrap();
        let prior = ChannelPrior::new(0.0, 0.0, 0.0, 4).unwrap();
        let v = w("0010101111");
        let post = forward_backward(&v, &params, &prior).unwrap();
        assert_eq!(post.llr.hard_decision(), v);
        for (l, b) in post.llr.values().iter().zip(v.iter()) {
            assert_eq!(*l, if b == 0 { f64::INFINITY } else { f64::NEG_INFINITY });
        }
        let oracle = exact_map_oracle(&v, &params, &prior).unwrap();
        assert_eq!(oracle.llr, post.llr);
    }

    #[test]
    fn noiseless_prior_rejects_non_codewords() {
        let params = VtParams::with_length(10).unwrap();
        let prior = ChannelPrior::new(0.0, 0.0, 0.0, 4).unwrap();
        let r = w("0010111111");
        assert_eq!(forward_backward(&r, &params, &prior).unwrap_err(), SisoError::NoValidPath);
        let out = decode_siso(&r, &params, &prior);
        assert!(out.fallback);
        assert_eq!(out.decoded, r);
        assert!(out.llr.values().iter().all(|&l| l == 0.0));
    }

    #[test]
    fn drift_beyond_bound_is_rejected() {
        let params = VtParams::with_length(10).unwrap();
        let prior = ChannelPrior::new(0.01, 0.01, 0.01, 1).unwrap();
        let err = forward_backward(&w("00101011"), &params, &prior).unwrap_err();
        assert!(matches!(err, SisoError::DriftExceeded { drift: 2, .. }));
        assert!(decode_siso(&w("00101011"), &params, &prior).fallback);
    }

    #[test]
    fn corrects_example_deletion() {
        let params = VtParams::with_length(10).unwrap();
        let r = w("001011111");
        let prior = ChannelPrior::from_channel(&ChannelSpec::fixed(1), 10, r.len());
        let out = decode_siso(&r, &params, &prior);
        assert_eq!(out.decoded, w("0010101111"));
        assert_eq!(out.decoded, crate::hd::decode_hd(&r, &params).decoded);
    }

    #[test]
    fn matches_oracle_on_a_few_words() {
        let params = VtParams::new(8, 3).unwrap();
        let prior = ChannelPrior::new(0.03, 0.04, 0.02, 4).unwrap();
        for r in ["10110010", "1011001", "101100101", "1111111111", "0110", "000000000000"] {
            let r = w(r);
            let fb = forward_backward(&r, &params, &prior).unwrap();
            let ex = exact_map_oracle(&r, &params, &prior).unwrap();
            assert!((fb.log_evidence - ex.log_evidence).abs() < 1e-9, "{r}");
            assert!((fb.log_evidence - fb.log_evidence_backward).abs() < 1e-9, "{r}");
            for (x, y) in fb.llr.values().iter().zip(ex.llr.values()) {
                assert!(close(*x, *y), "{r}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn apriori_llrs_shift_the_posterior() {
        let params = VtParams::with_length(10).unwrap();
        let prior = ChannelPrior::new(0.02, 0.02, 0.02, 4).unwrap();
        let r = w("0010111111");
        let flat = forward_backward(&r, &params, &prior).unwrap();
        let mut apriori = vec![0.0; 10];
        apriori[5] = 3.0;
        let biased = forward_backward_with_apriori(&r, &params, &prior, &apriori).unwrap();
        assert!(biased.llr.values()[5] > flat.llr.values()[5]);
        assert!(forward_backward_with_apriori(&r, &params, &prior, &[0.0; 3]).is_err());
    }

    #[test]
    fn oracle_size_limit() {
        let params = VtParams::with_length(13).unwrap();
        let prior = ChannelPrior::new(0.01, 0.01, 0.01, 4).unwrap();
        assert_eq!(
            exact_map_oracle(&BitWord::zeros(13), &params, &prior).unwrap_err(),
            SisoError::SizeLimit(13)
        );
    }

    #[test]
    fn log_sum_exp_handles_infinities() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert!((log_sum_exp(&[0.0, 0.0]) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((log_sum_exp(&[-1000.0, -1000.0]) - (-1000.0 + std::f64::consts::LN_2)).abs() < 1e-12);
    }
}
