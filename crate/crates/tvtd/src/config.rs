//! Model and training hyperparameters with a flat `key=value` text form.
//!
//! ```text
//! # comments and blank lines are ignored
//! n=20
//! d_model=128
//! window=all
//! ```
//!
//! Keys not present keep the desk-scale default for the given `n`, so `n`
//! is the only required key. The feed-forward width is always `4 * d_model`.

use std::fmt;
use std::str::FromStr;

use crate::error::TvtdError;

#[derive(Debug, Clone, PartialEq)]
pub struct TvtdConfig {
    pub n: usize,
    /// Largest supported excess of received over transmitted length; sizes
    /// the position tables at `n + max_drift`.
    pub max_drift: usize,
    pub d_model: usize,
    /// Decoder depth.
    pub n_layers: usize,
    /// Memory encoder depth; 0 uses the codeword embedding directly.
    pub n_enc_layers: usize,
    pub n_heads: usize,
    /// Self-attention window; `window >= n` is plain causal attention.
    pub window: usize,
    /// Prepend the two statistic positions to the memory.
    pub memory_stats: bool,
    /// Add running-prefix statistic embeddings to decoder tokens.
    pub target_stats: bool,
    pub lr: f64,
    pub warmup_steps: usize,
    /// Global gradient-norm clip; 0 disables.
    pub clip: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
}

const KEYS: [&str; 16] = [
    "n",
    "max_drift",
    "d_model",
    "n_layers",
    "n_enc_layers",
    "n_heads",
    "window",
    "memory_stats",
    "target_stats",
    "lr",
    "warmup_steps",
    "clip",
    "epochs",
    "batch",
    "seed",
    "d_ff",
];

impl TvtdConfig {
    /// Single-machine defaults: `d_model = 128`, three decoder layers, four
    /// heads.
    pub fn desk(n: usize) -> Self {
        Self {
            n,
            max_drift: 4,
            d_model: 128,
            n_layers: 3,
            n_enc_layers: 0,
            n_heads: 4,
            window: n,
            memory_stats: true,
            target_stats: true,
            lr: 1e-3,
            warmup_steps: 200,
            clip: 1.0,
            epochs: 50,
            batch: 64,
            seed: 0,
        }
    }

    /// Full-size setting: `d_model = 512`, three layers of eight heads,
    /// lr `1e-4` over 200 epochs, window `n / 4` (20 for `n = 20`).
    pub fn full(n: usize) -> Self {
        Self {
            d_model: 512,
            n_heads: 8,
            lr: 1e-4,
            warmup_steps: 0,
            clip: 0.0,
            epochs: 200,
            window: if n <= 20 { 20 } else { n / 4 },
            ..Self::desk(n)
        }
    }

    pub fn d_ff(&self) -> usize {
        4 * self.d_model
    }

    pub fn head_dim(&self) -> usize {
        self.d_model / self.n_heads
    }

    /// Rows of each symbol table position axis.
    pub fn max_positions(&self) -> usize {
        self.n + self.max_drift
    }

    /// Largest statistic key, `L (L + 1) / 2` for `L = n + max_drift`.
    pub fn max_stat_key(&self) -> usize {
        let l = self.max_positions();
        l * (l + 1) / 2
    }

    pub fn validate(&self) -> Result<(), TvtdError> {
        let fail = |msg: String| Err(TvtdError::Config(msg));
        if self.n == 0 {
            return fail("n must be positive".into());
        }
        if self.d_model == 0 || self.n_heads == 0 || self.d_model % self.n_heads != 0 {
            return fail(format!(
                "d_model {} must be a positive multiple of n_heads {}",
                self.d_model, self.n_heads
            ));
        }
        if self.window == 0 {
            return fail("window must be at least 1".into());
        }
        if self.n_layers == 0 {
            return fail("n_layers must be at least 1".into());
        }
        if self.batch == 0 {
            return fail("batch must be at least 1".into());
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return fail(format!("lr {} must be positive", self.lr));
        }
        if !(self.clip.is_finite() && self.clip >= 0.0) {
            return fail(format!("clip {} must be non-negative", self.clip));
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), TvtdError> {
        fn num<V: FromStr>(key: &str, value: &str) -> Result<V, TvtdError> {
            value
                .parse()
                .map_err(|_| TvtdError::Config(format!("bad value {value:?} for {key}")))
        }
        match key {
            "n" => self.n = num(key, value)?,
            "max_drift" => self.max_drift = num(key, value)?,
            "d_model" => self.d_model = num(key, value)?,
            "n_layers" => self.n_layers = num(key, value)?,
            "n_enc_layers" => self.n_enc_layers = num(key, value)?,
            "n_heads" => self.n_heads = num(key, value)?,
            "window" if value == "all" => self.window = self.n,
            "window" => self.window = num(key, value)?,
            "memory_stats" => self.memory_stats = num(key, value)?,
            "target_stats" => self.target_stats = num(key, value)?,
            "lr" => self.lr = num(key, value)?,
            "warmup_steps" => self.warmup_steps = num(key, value)?,
            "clip" => self.clip = num(key, value)?,
            "epochs" => self.epochs = num(key, value)?,
            "batch" => self.batch = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "d_ff" => {
                let d_ff: usize = num(key, value)?;
                if d_ff != self.d_ff() {
                    return Err(TvtdError::Config(format!(
                        "d_ff is fixed at 4 * d_model = {}, got {d_ff}",
                        self.d_ff()
                    )));
                }
            }
            _ => return Err(TvtdError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "n" => self.n.to_string(),
            "max_drift" => self.max_drift.to_string(),
            "d_model" => self.d_model.to_string(),
            "n_layers" => self.n_layers.to_string(),
            "n_enc_layers" => self.n_enc_layers.to_string(),
            "n_heads" => self.n_heads.to_string(),
            "window" => self.window.to_string(),
            "memory_stats" => self.memory_stats.to_string(),
            "target_stats" => self.target_stats.to_string(),
            "lr" => self.lr.to_string(),
            "warmup_steps" => self.warmup_steps.to_string(),
            "clip" => self.clip.to_string(),
            "epochs" => self.epochs.to_string(),
            "batch" => self.batch.to_string(),
            "seed" => self.seed.to_string(),
            "d_ff" => self.d_ff().to_string(),
            _ => return None,
        })
    }

    /// Parses the text form. `n` may appear anywhere; `d_ff` is checked
    /// after `d_model` is known.
    pub fn parse(text: &str) -> Result<Self, TvtdError> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| TvtdError::Config(format!("line {}: expected key=value", i + 1)))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let n = pairs
            .iter()
            .find(|(k, _)| k == "n")
            .ok_or_else(|| TvtdError::Config("missing key n".into()))?
            .1
            .parse()
            .map_err(|_| TvtdError::Config("bad value for n".into()))?;
        let mut cfg = Self::desk(n);
        for (k, v) in pairs.iter().filter(|(k, _)| k != "d_ff") {
            cfg.set(k, v)?;
        }
        for (k, v) in pairs.iter().filter(|(k, _)| k == "d_ff") {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for TvtdConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for key in KEYS {
            writeln!(f, "{key}={}", self.get(key).expect("known key"))?;
        }
        Ok(())
    }
}

impl FromStr for TvtdConfig {
    type Err = TvtdError;
    fn from_str(s: &str) -> Result<Self, TvtdError> {
        Self::parse(s)
    }
}
