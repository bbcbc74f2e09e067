//! Architecture ablations: each variant of a base config is trained on the
//! training part of the codebook split and evaluated on the held-out part.
//!
//! CSV columns:
//! `kind,variant,errors,trials,ber,fer,one_minus_ber,one_minus_fer,final_loss`.

use std::str::FromStr;
use std::sync::Arc;

use vt_core::{ChannelSpec, VtParams};
use vt_tvtd::{train, EpochReport, TvtdConfig, TvtdModel};

use crate::dataset::{split_codebook, CorruptingSource, Task};
use crate::error::HarnessError;
use crate::eval::{evaluate, Decoder, ExperimentSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AblationKind {
    /// Self-attention window sizes 1, 2, 4, ... below `n`, then `all`.
    Window,
    /// Statistic embeddings on the memory / target side: w/w, w/wo, wo/w, wo/wo.
    Statistic,
    /// No memory encoder versus as many encoder layers as decoder layers.
    EncoderDepth,
}

impl FromStr for AblationKind {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, HarnessError> {
        match s {
            "window" => Ok(Self::Window),
            "statistic" => Ok(Self::Statistic),
            "encoder_depth" => Ok(Self::EncoderDepth),
            _ => Err(HarnessError::Invalid(format!(
                "ablation {s:?}: expected window, statistic or encoder_depth"
            ))),
        }
    }
}

impl AblationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Window => "window",
            Self::Statistic => "statistic",
            Self::EncoderDepth => "encoder_depth",
        }
    }

    /// `(label, config)` for every cell.
    pub fn variants(&self, base: &TvtdConfig) -> Vec<(String, TvtdConfig)> {
        match self {
            Self::Window => {
                let mut out: Vec<_> = [1usize, 2, 4, 8, 16, 32]
                    .into_iter()
                    .filter(|&w| w < base.n)
                    .map(|w| (w.to_string(), TvtdConfig { window: w, ..base.clone() }))
                    .collect();
                out.push(("all".into(), TvtdConfig { window: base.n, ..base.clone() }));
                out
            }
            Self::Statistic => [(true, true), (true, false), (false, true), (false, false)]
                .into_iter()
                .map(|(m, t)| {
                    let label = format!("{}/{}", if m { "w" } else { "wo" }, if t { "w" } else { "wo" });
                    (
                        label,
                        TvtdConfig {
                            memory_stats: m,
                            target_stats: t,
                            ..base.clone()
                        },
                    )
                })
                .collect(),
            Self::EncoderDepth => [0, base.n_layers]
                .into_iter()
                .map(|e| {
                    (
                        format!("{}+{}", e, base.n_layers),
                        TvtdConfig {
                            n_enc_layers: e,
                            ..base.clone()
                        },
                    )
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub kind: AblationKind,
    pub variant: String,
    pub errors: usize,
    pub trials: u64,
    pub ber: f64,
    pub fer: f64,
    pub final_loss: f64,
}

pub struct AblationPlan {
    pub kind: AblationKind,
    pub base: TvtdConfig,
    pub code: VtParams,
    pub task: Task,
    pub split_seed: u64,
    /// Fixed error counts evaluated on the held-out codewords.
    pub eval_errors: Vec<usize>,
    pub eval_seed: u64,
}

pub fn ablation_suite(
    plan: &AblationPlan,
    mut on_epoch: impl FnMut(&str, &EpochReport),
) -> Result<Vec<AblationRow>, HarnessError> {
    if plan.base.n != plan.code.n() {
        return Err(HarnessError::Invalid(format!(
            "config n = {} but code n = {}",
            plan.base.n,
            plan.code.n()
        )));
    }
    let split = split_codebook(&plan.code, plan.split_seed)?;
    let test = Arc::new(split.test);
    let mut rows = Vec::new();
    for (label, cfg) in plan.kind.variants(&plan.base) {
        let mut model = TvtdModel::<f32>::new(cfg.clone(), cfg.seed)?;
        let mut source = CorruptingSource::new(split.train.clone(), plan.task, cfg.seed);
        let report = train(&mut model, &mut source, |e| on_epoch(&label, e))?;
        let final_loss = report.epochs.last().map_or(f64::NAN, |e| e.loss);
        let decoder = Decoder::Tvtd(Arc::new(model));
        for &k in &plan.eval_errors {
            let mut spec = ExperimentSpec::new(
                plan.code.clone(),
                ChannelSpec::fixed(k),
                decoder.clone(),
                test.len(),
                plan.eval_seed,
            );
            spec.pool = Some(test.clone());
            let m = evaluate(&spec)?;
            rows.push(AblationRow {
                kind: plan.kind,
                variant: label.clone(),
                errors: k,
                trials: m.trials,
                ber: m.ber,
                fer: m.fer,
                final_loss,
            });
        }
    }
    Ok(rows)
}

pub fn to_csv(rows: &[AblationRow]) -> String {
    let mut s = String::from("kind,variant,errors,trials,ber,fer,one_minus_ber,one_minus_fer,final_loss\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.kind.as_str(),
            r.variant,
            r.errors,
            r.trials,
            r.ber,
            r.fer,
            1.0 - r.ber,
            1.0 - r.fer,
            r.final_loss
        ));
    }
    s
}
