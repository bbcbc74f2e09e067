//! Teacher-forced training with Adam and a cosine learning-rate schedule.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::TvtdError;
use crate::linalg::Scalar;
use crate::model::{Sample, TvtdModel};
use crate::params::ParamStore;

/// Training pairs for each epoch. Implementations may return fresh
/// corruptions every epoch; the count must stay fixed.
pub trait SampleSource {
    fn len(&self) -> usize;
    fn samples(&mut self, epoch: usize) -> Vec<Sample>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl SampleSource for Vec<Sample> {
    fn len(&self) -> usize {
        Vec::len(self)
    }

    fn samples(&mut self, _epoch: usize) -> Vec<Sample> {
        self.clone()
    }
}

/// Linear warmup over `warmup` steps, then cosine decay from `base` to 0 at
/// `total`.
pub fn cosine_lr(base: f64, step: usize, total: usize, warmup: usize) -> f64 {
    if step < warmup {
        return base * (step + 1) as f64 / warmup as f64;
    }
    let span = total.saturating_sub(warmup).max(1) as f64;
    let progress = ((step - warmup) as f64 / span).min(1.0);
    0.5 * base * (1.0 + (std::f64::consts::PI * progress).cos())
}

/// Adam with `beta1 = 0.9`, `beta2 = 0.999`, `eps = 1e-8`.
#[derive(Debug, Clone)]
pub struct Adam<T> {
    m: Vec<T>,
    v: Vec<T>,
    step: u32,
}

impl<T: Scalar> Adam<T> {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    pub fn new(len: usize) -> Self {
        Self {
            m: vec![T::zero(); len],
            v: vec![T::zero(); len],
            step: 0,
        }
    }

    pub fn step(&mut self, params: &mut ParamStore<T>, grads: &ParamStore<T>, lr: f64) {
        assert!(params.same_layout(grads));
        self.step += 1;
        let (b1, b2) = (T::of(Self::BETA1), T::of(Self::BETA2));
        let c1 = 1.0 - Self::BETA1.powi(self.step as i32);
        let c2 = 1.0 - Self::BETA2.powi(self.step as i32);
        let step_size = T::of(lr * c2.sqrt() / c1);
        let eps = T::of(Self::EPS * c2.sqrt());
        let it = params
            .as_mut_slice()
            .iter_mut()
            .zip(grads.as_slice())
            .zip(self.m.iter_mut().zip(self.v.iter_mut()));
        for ((p, &g), (m, v)) in it {
            *m = b1 * *m + (T::one() - b1) * g;
            *v = b2 * *v + (T::one() - b2) * g * g;
            *p = *p - step_size * *m / (v.sqrt() + eps);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochReport {
    pub epoch: usize,
    /// Mean per-bit cross-entropy over the epoch.
    pub loss: f64,
    /// Teacher-forced token accuracy over the epoch (pre-update predictions).
    pub accuracy: f64,
    pub steps: usize,
    pub lr: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    pub epochs: Vec<EpochReport>,
    pub steps: usize,
}

impl TrainReport {
    pub fn loss_curve(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.loss).collect()
    }
}

fn grad_norm<T: Scalar>(g: &ParamStore<T>) -> f64 {
    g.as_slice()
        .iter()
        .map(|x| {
            let v = x.to_f64().unwrap_or(f64::NAN);
            v * v
        })
        .sum::<f64>()
        .sqrt()
}

/// Trains for `config.epochs` epochs of shuffled mini-batches. The schedule
/// runs over the total step count. Deterministic for a fixed seed and
/// source.
pub fn train<T: Scalar>(
    model: &mut TvtdModel<T>,
    source: &mut dyn SampleSource,
    mut on_epoch: impl FnMut(&EpochReport),
) -> Result<TrainReport, TvtdError> {
    let cfg = model.config().clone();
    cfg.validate()?;
    if source.is_empty() {
        return Err(TvtdError::EmptyDataset);
    }
    let per_epoch = source.len().div_ceil(cfg.batch);
    let total = per_epoch * cfg.epochs;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(model.param_count());
    let mut report = TrainReport::default();
    for epoch in 0..cfg.epochs {
        let data = source.samples(epoch);
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut rng);
        let (mut loss_sum, mut correct, mut tokens) = (0.0, 0, 0);
        let mut lr = 0.0;
        for idx in order.chunks(cfg.batch) {
            let batch: Vec<Sample> = idx.iter().map(|&i| data[i].clone()).collect();
            let (stats, mut grads) = model.loss_and_grad(&batch)?;
            if !stats.loss.is_finite() {
                return Err(TvtdError::NonFiniteLoss {
                    epoch,
                    step: report.steps,
                });
            }
            if cfg.clip > 0.0 {
                let norm = grad_norm(&grads);
                if norm > cfg.clip {
                    let s = T::of(cfg.clip / norm);
                    grads.as_mut_slice().iter_mut().for_each(|g| *g = *g * s);
                }
            }
            lr = cosine_lr(cfg.lr, report.steps, total, cfg.warmup_steps);
            adam.step(model.params_mut(), &grads, lr);
            report.steps += 1;
            loss_sum += stats.loss * stats.tokens as f64;
            correct += stats.correct;
            tokens += stats.tokens;
        }
        let er = EpochReport {
            epoch,
            loss: loss_sum / tokens as f64,
            accuracy: correct as f64 / tokens as f64,
            steps: report.steps,
            lr,
        };
        on_epoch(&er);
        report.epochs.push(er);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_shape() {
        assert_eq!(cosine_lr(1.0, 0, 100, 0), 1.0);
        assert!((cosine_lr(1.0, 50, 100, 0) - 0.5).abs() < 1e-12);
        assert!(cosine_lr(1.0, 100, 100, 0).abs() < 1e-12);
        assert!((cosine_lr(1.0, 4, 100, 10) - 0.5).abs() < 1e-12);
        assert_eq!(cosine_lr(1.0, 10, 110, 10), 1.0);
    }

    #[test]
    fn adam_minimizes_a_quadratic() {
        let mut p = ParamStore::<f64>::new();
        let id = p.add("x", &[2]);
        p.get_mut(id).copy_from_slice(&[3.0, -2.0]);
        let mut adam = Adam::new(2);
        for _ in 0..2000 {
            let mut g = p.zeros_like();
            let x = p.get(id).to_vec();
            g.get_mut(id).copy_from_slice(&[2.0 * x[0], 2.0 * x[1]]);
            adam.step(&mut p, &g, 0.01);
        }
        assert!(p.get(id).iter().all(|v| v.abs() < 1e-3));
    }
}
