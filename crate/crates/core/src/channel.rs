//! Insertion/deletion/substitution (IDS) channel simulation.
//!
//! Two regimes are provided. [`corrupt_fixed`] applies exactly `k` events one
//! after another, each seeing the sequence left by the previous one.
//! [`corrupt_iid`] scans the transmitted positions and, independently at each,
//! triggers one event with probability `rate`. Both produce a
//! [`CorruptionLog`] so the realization can be audited.
//!
//! A substitution always flips the bit, so every logged event is a real
//! channel error.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitWord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Insertion,
    Deletion,
    Substitution,
}

impl ErrorKind {
    pub const ALL: [ErrorKind; 3] = [
        ErrorKind::Insertion,
        ErrorKind::Deletion,
        ErrorKind::Substitution,
    ];
}

/// One channel event. `position` is one-based and refers to the sequence as
/// it was when the event was applied; an insertion at `position` leaves the
/// new bit at that index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorEvent {
    pub kind: ErrorKind,
    pub position: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub inserted_bit: Option<u8>,
}

impl ErrorEvent {
    pub fn insertion(position: usize, bit: u8) -> Self {
        Self {
            kind: ErrorKind::Insertion,
            position,
            inserted_bit: Some(bit),
        }
    }

    pub fn deletion(position: usize) -> Self {
        Self {
            kind: ErrorKind::Deletion,
            position,
            inserted_bit: None,
        }
    }

    pub fn substitution(position: usize) -> Self {
        Self {
            kind: ErrorKind::Substitution,
            position,
            inserted_bit: None,
        }
    }

    /// Applies the event to `word` in place.
    ///
    /// # Panics
    ///
    /// If the position is out of range for `word`.
    pub fn apply(&self, word: &mut BitWord) {
        match self.kind {
            ErrorKind::Insertion => word.insert(self.position, self.inserted_bit.unwrap_or(0)),
            ErrorKind::Deletion => {
                word.remove(self.position);
            }
            ErrorKind::Substitution => word.flip(self.position),
        }
    }
}

/// Trace of one channel realization.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorruptionLog {
    pub events: Vec<ErrorEvent>,
    pub source_length: usize,
    pub result_length: usize,
}

impl CorruptionLog {
    pub fn count(&self, kind: ErrorKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    /// Replays the events on `source`. For logs produced by [`corrupt_fixed`]
    /// and [`corrupt_iid`] this reproduces the channel output.
    pub fn replay(&self, source: &BitWord) -> BitWord {
        let mut word = source.clone();
        for e in &self.events {
            e.apply(&mut word);
        }
        word
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("error rate {0} outside [0, 1]")]
    Rate(f64),
    #[error("type weights must be non-negative and sum to 1, got {0:?}")]
    Weights([f64; 3]),
}

/// Channel regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ChannelMode {
    FixedCount { k: usize },
    Iid { rate: f64 },
}

/// A channel regime plus the relative frequencies of insertion, deletion and
/// substitution (in that order).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    #[serde(flatten)]
    pub mode: ChannelMode,
    pub type_weights: [f64; 3],
}

impl ChannelSpec {
    pub const UNIFORM: [f64; 3] = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];

    pub fn fixed(k: usize) -> Self {
        Self {
            mode: ChannelMode::FixedCount { k },
            type_weights: Self::UNIFORM,
        }
    }

    pub fn iid(rate: f64) -> Result<Self, ChannelError> {
        Self {
            mode: ChannelMode::Iid { rate },
            type_weights: Self::UNIFORM,
        }
        .validated()
    }

    pub fn with_weights(mut self, weights: [f64; 3]) -> Result<Self, ChannelError> {
        self.type_weights = weights;
        self.validated()
    }

    pub fn validated(self) -> Result<Self, ChannelError> {
        if let ChannelMode::Iid { rate } = self.mode {
            if !(0.0..=1.0).contains(&rate) {
                return Err(ChannelError::Rate(rate));
            }
        }
        let sum: f64 = self.type_weights.iter().sum();
        if self.type_weights.iter().any(|w| !(*w >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(ChannelError::Weights(self.type_weights));
        }
        Ok(self)
    }

    /// Runs the channel on `codeword`.
    pub fn corrupt<R: Rng + ?Sized>(&self, codeword: &BitWord, rng: &mut R) -> (BitWord, CorruptionLog) {
        match self.mode {
            ChannelMode::FixedCount { k } => corrupt_fixed_weighted(codeword, k, &self.type_weights, rng),
            ChannelMode::Iid { rate } => corrupt_iid_weighted(codeword, rate, &self.type_weights, rng),
        }
    }
}

fn draw_kind<R: Rng + ?Sized>(weights: &[f64; 3], rng: &mut R) -> ErrorKind {
    let u: f64 = rng.gen::<f64>() * weights.iter().sum::<f64>();
    if u < weights[0] {
        ErrorKind::Insertion
    } else if u < weights[0] + weights[1] {
        ErrorKind::Deletion
    } else {
        ErrorKind::Substitution
    }
}

/// Applies exactly `k` events with uniform type weights.
pub fn corrupt_fixed<R: Rng + ?Sized>(codeword: &BitWord, k: usize, rng: &mut R) -> (BitWord, CorruptionLog) {
    corrupt_fixed_weighted(codeword, k, &ChannelSpec::UNIFORM, rng)
}

pub fn corrupt_fixed_weighted<R: Rng + ?Sized>(
    codeword: &BitWord,
    k: usize,
    weights: &[f64; 3],
    rng: &mut R,
) -> (BitWord, CorruptionLog) {
    let mut word = codeword.clone();
    let mut events = Vec::with_capacity(k);
    for _ in 0..k {
        // Deletions and substitutions need a bit to act on; redraw the kind
        // until one applies. An insertion is always possible.
        let kind = loop {
            let kind = draw_kind(weights, rng);
            if kind == ErrorKind::Insertion || !word.is_empty() {
                break kind;
            }
            if weights[0] == 0.0 {
                break ErrorKind::Insertion;
            }
        };
        let event = match kind {
            ErrorKind::Insertion => {
                let position = rng.gen_range(1..=word.len() + 1);
                ErrorEvent::insertion(position, rng.gen_range(0..=1))
            }
            ErrorKind::Deletion => ErrorEvent::deletion(rng.gen_range(1..=word.len())),
            ErrorKind::Substitution => ErrorEvent::substitution(rng.gen_range(1..=word.len())),
        };
        event.apply(&mut word);
        events.push(event);
    }
    let log = CorruptionLog {
        events,
        source_length: codeword.len(),
        result_length: word.len(),
    };
    (word, log)
}

/// Independent events at each transmitted position with uniform type weights.
pub fn corrupt_iid<R: Rng + ?Sized>(codeword: &BitWord, rate: f64, rng: &mut R) -> (BitWord, CorruptionLog) {
    corrupt_iid_weighted(codeword, rate, &ChannelSpec::UNIFORM, rng)
}

/// At every transmitted position an event fires with probability `rate`: an
/// insertion emits a uniform bit and then the transmitted bit, a deletion
/// drops the bit, a substitution emits its complement. After the last bit
/// one more slot allows a trailing insertion (an event drawn there of any
/// other kind has nothing to act on and is not logged).
pub fn corrupt_iid_weighted<R: Rng + ?Sized>(
    codeword: &BitWord,
    rate: f64,
    weights: &[f64; 3],
    rng: &mut R,
) -> (BitWord, CorruptionLog) {
    let n = codeword.len();
    let mut out = BitWord::new();
    let mut events = Vec::new();
    for slot in 1..=n + 1 {
        let fires = rate > 0.0 && rng.gen::<f64>() < rate;
        let kind = fires.then(|| draw_kind(weights, rng));
        let position = out.len() + 1;
        if slot > n {
            if kind == Some(ErrorKind::Insertion) {
                let bit = rng.gen_range(0..=1);
                out.push(bit);
                events.push(ErrorEvent::insertion(position, bit));
            }
            break;
        }
        let bit = codeword.bit(slot);
        match kind {
            None => out.push(bit),
            Some(ErrorKind::Insertion) => {
                let extra = rng.gen_range(0..=1);
                out.push(extra);
                out.push(bit);
                events.push(ErrorEvent::insertion(position, extra));
            }
            Some(ErrorKind::Deletion) => events.push(ErrorEvent::deletion(position)),
            Some(ErrorKind::Substitution) => {
                out.push(bit ^ 1);
                events.push(ErrorEvent::substitution(position));
            }
        }
    }
    let log = CorruptionLog {
        events,
        source_length: n,
        result_length: out.len(),
    };
    (out, log)
}

/// Levenshtein distance with unit insertion, deletion and substitution costs.
pub fn edit_distance(a: &BitWord, b: &BitWord) -> usize {
    let (a, b) = (a.as_slice(), b.as_slice());
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}
