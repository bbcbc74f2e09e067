//! Monte Carlo evaluation of a decoder on a channel.
//!
//! Trial `i` draws its codeword and channel realization from its own random
//! stream (`seed`, stream `i`), so results do not depend on how trials are
//! spread over threads.

use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use vt_core::{decode_hd, decode_siso, hd::fallback_word, BitWord, ChannelPrior, ChannelSpec, VtParams};
use vt_tvtd::TvtdModel;

use crate::dataset::random_codeword;
use crate::error::HarnessError;
use crate::metrics::{Counts, MetricsReport, ReportContext, Scope};

/// Trials decoded together; also the TVTD inference batch.
const CHUNK: usize = 256;

#[derive(Clone)]
pub enum Decoder {
    Hd,
    Siso,
    Tvtd(Arc<TvtdModel<f32>>),
}

impl std::fmt::Debug for Decoder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One decoded word.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub word: BitWord,
    pub fallback: bool,
}

impl Decoder {
    pub fn name(&self) -> &'static str {
        match self {
            Decoder::Hd => "hd",
            Decoder::Siso => "siso",
            Decoder::Tvtd(_) => "tvtd",
        }
    }

    /// Checks that the decoder can serve `code`.
    pub fn check(&self, code: &VtParams) -> Result<(), HarnessError> {
        if let Decoder::Tvtd(m) = self {
            if m.config().n != code.n() {
                return Err(HarnessError::Invalid(format!(
                    "checkpoint decodes n = {}, code has n = {}",
                    m.config().n,
                    code.n()
                )));
            }
        }
        Ok(())
    }

    /// Decodes a batch. SISO uses the prior matched to `channel`. TVTD
    /// words longer than its position table fall back to truncation.
    pub fn decode_batch(&self, received: &[BitWord], code: &VtParams, channel: &ChannelSpec) -> Vec<Decoded> {
        let n = code.n();
        match self {
            Decoder::Hd => received
                .iter()
                .map(|r| {
                    let out = decode_hd(r, code);
                    Decoded {
                        fallback: out.status == vt_core::HdStatus::Fallback,
                        word: out.decoded,
                    }
                })
                .collect(),
            Decoder::Siso => received
                .iter()
                .map(|r| {
                    let prior = ChannelPrior::from_channel(channel, n, r.len());
                    let out = decode_siso(r, code, &prior);
                    Decoded {
                        word: out.decoded,
                        fallback: out.fallback,
                    }
                })
                .collect(),
            Decoder::Tvtd(model) => {
                let limit = model.config().max_positions();
                let fits: Vec<BitWord> = received.iter().filter(|r| r.len() <= limit).cloned().collect();
                let mut decoded = model.infer_batch(&fits).expect("lengths checked").into_iter();
                received
                    .iter()
                    .map(|r| {
                        if r.len() <= limit {
                            Decoded {
                                word: decoded.next().expect("one output per input"),
                                fallback: false,
                            }
                        } else {
                            Decoded {
                                word: fallback_word(r, n),
                                fallback: true,
                            }
                        }
                    })
                    .collect()
            }
        }
    }
}

/// Parses `n` or `n,a`.
pub fn parse_code(s: &str) -> Result<VtParams, HarnessError> {
    let bad = || HarnessError::Invalid(format!("code {s:?}: expected n or n,a"));
    let (n, a) = match s.split_once(',') {
        Some((n, a)) => (n.trim().parse().map_err(|_| bad())?, a.trim().parse().map_err(|_| bad())?),
        None => (s.trim().parse().map_err(|_| bad())?, 0),
    };
    Ok(VtParams::new(n, a)?)
}

/// Parses `fixed:K` or `iid:RATE`.
pub fn parse_channel(s: &str) -> Result<ChannelSpec, HarnessError> {
    let bad = || HarnessError::Invalid(format!("channel {s:?}: expected fixed:K or iid:RATE"));
    match s.split_once(':') {
        Some(("fixed", k)) => Ok(ChannelSpec::fixed(k.parse().map_err(|_| bad())?)),
        Some(("iid", r)) => Ok(ChannelSpec::iid(r.parse().map_err(|_| bad())?)?),
        _ => Err(bad()),
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub code: VtParams,
    pub channel: ChannelSpec,
    pub decoder: Decoder,
    pub trials: usize,
    pub seed: u64,
    /// Score only the message positions.
    pub message_only: bool,
    /// Transmit `pool[i % len]` in trial `i` instead of random codewords.
    pub pool: Option<Arc<Vec<BitWord>>>,
    pub timing: bool,
}

impl ExperimentSpec {
    pub fn new(code: VtParams, channel: ChannelSpec, decoder: Decoder, trials: usize, seed: u64) -> Self {
        Self {
            code,
            channel,
            decoder,
            trials,
            seed,
            message_only: false,
            pool: None,
            timing: false,
        }
    }

    /// Codeword and received word of trial `i`.
    pub fn trial(&self, i: usize) -> (BitWord, BitWord) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(i as u64);
        let cw = match &self.pool {
            Some(p) => p[i % p.len()].clone(),
            None => random_codeword(&self.code, &mut rng),
        };
        let (r, _) = self.channel.corrupt(&cw, &mut rng);
        (cw, r)
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::Invalid("trials must be at least 1".into()));
        }
        if self.pool.as_ref().is_some_and(|p| p.is_empty()) {
            return Err(HarnessError::Invalid("codeword pool is empty".into()));
        }
        self.channel.validated()?;
        self.decoder.check(&self.code)
    }
}

fn score(spec: &ExperimentSpec, truth: &BitWord, out: &Decoded) -> Counts {
    let code = &spec.code;
    let bit_errors = if spec.message_only {
        let a = code.extract_message(truth).expect("length n");
        let b = code.extract_message(&out.word).expect("length n");
        a.bit_errors(&b)
    } else {
        truth.bit_errors(&out.word)
    } as u64;
    Counts {
        frames: 1,
        bit_errors,
        frame_errors: u64::from(bit_errors > 0),
        fallbacks: u64::from(out.fallback),
    }
}

pub fn evaluate(spec: &ExperimentSpec) -> Result<MetricsReport, HarnessError> {
    spec.validate()?;
    let start = Instant::now();
    let chunks: Vec<(usize, usize)> = (0..spec.trials)
        .step_by(CHUNK)
        .map(|s| (s, (s + CHUNK).min(spec.trials)))
        .collect();
    let counts = chunks
        .par_iter()
        .map(|&(lo, hi)| {
            let (truth, received): (Vec<_>, Vec<_>) = (lo..hi).map(|i| spec.trial(i)).unzip();
            let decoded = spec.decoder.decode_batch(&received, &spec.code, &spec.channel);
            truth
                .iter()
                .zip(&decoded)
                .map(|(t, d)| score(spec, t, d))
                .fold(Counts::default(), |a, b| a + b)
        })
        .reduce(Counts::default, |a, b| a + b);
    let (scope, bits_per_frame) = if spec.message_only {
        (Scope::Message, spec.code.message_len())
    } else {
        (Scope::Codeword, spec.code.n())
    };
    let mut report = MetricsReport::from_counts(
        ReportContext {
            n: spec.code.n(),
            a: spec.code.a(),
            channel: spec.channel,
            decoder: spec.decoder.name(),
            seed: spec.seed,
            scope,
            bits_per_frame,
        },
        counts,
    );
    if spec.timing {
        report.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
    }
    Ok(report)
}
