//! Training and test data: random codewords, the full-codebook train/test
//! split, channel tasks and the two-column TSV format
//! (`received<TAB>codeword`, one pair per line).

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vt_core::{corrupt_fixed, BitWord, ChannelSpec, VtParams};
use vt_tvtd::{Sample, SampleSource};

use crate::error::HarnessError;

/// Training corruption regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Task {
    /// Error count uniform over `0..=k`.
    Fixed(usize),
    /// I.i.d. channel at the given rate.
    Iid(f64),
}

impl Task {
    pub fn corrupt<R: Rng + ?Sized>(&self, codeword: &BitWord, rng: &mut R) -> BitWord {
        match *self {
            Task::Fixed(max_k) => {
                let k = rng.gen_range(0..=max_k);
                corrupt_fixed(codeword, k, rng).0
            }
            Task::Iid(rate) => ChannelSpec::iid(rate).expect("validated rate").corrupt(codeword, rng).0,
        }
    }
}

impl FromStr for Task {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, HarnessError> {
        let bad = || HarnessError::Invalid(format!("task {s:?}: expected fixed:K or iid:RATE"));
        let (kind, value) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "fixed" => Ok(Task::Fixed(value.parse().map_err(|_| bad())?)),
            "iid" => {
                let rate: f64 = value.parse().map_err(|_| bad())?;
                ChannelSpec::iid(rate).map_err(|e| HarnessError::Invalid(e.to_string()))?;
                Ok(Task::Iid(rate))
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Task::Fixed(k) => write!(f, "fixed:{k}"),
            Task::Iid(r) => write!(f, "iid:{r}"),
        }
    }
}

/// Uniformly random message, encoded. Messages the encoder cannot place
/// (only possible when `n` is a power of two) are redrawn.
pub fn random_codeword<R: Rng + ?Sized>(code: &VtParams, rng: &mut R) -> BitWord {
    let y = code.message_len();
    loop {
        let u = BitWord::from_bits((0..y).map(|_| rng.gen_range(0..=1u8)));
        if let Ok(cw) = code.encode(&u) {
            return cw;
        }
    }
}

/// Disjoint train/test partition of the encoder's image: all `2^y`
/// messages are shuffled and the first `floor(0.8 * 2^y)` go to training.
#[derive(Debug, Clone, PartialEq)]
pub struct CodebookSplit {
    pub train: Vec<BitWord>,
    pub test: Vec<BitWord>,
}

pub fn split_codebook(code: &VtParams, seed: u64) -> Result<CodebookSplit, HarnessError> {
    let y = code.message_len();
    if y > 24 {
        return Err(HarnessError::Invalid(format!(
            "full-codebook split needs at most 2^24 messages, code has 2^{y}"
        )));
    }
    let mut words: Vec<BitWord> = (0..1u64 << y)
        .filter_map(|u| code.encode(&BitWord::from_integer(u, y)).ok())
        .collect();
    words.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = (words.len() as u64 * 4 / 5) as usize;
    let test = words.split_off(cut);
    Ok(CodebookSplit { train: words, test })
}

/// `count` pairs, codeword `i` drawn from `pool[i % len]` when a pool is
/// given and uniformly at random otherwise.
pub fn gen_dataset(
    code: &VtParams,
    channel: &ChannelSpec,
    count: usize,
    pool: Option<&[BitWord]>,
    seed: u64,
) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let cw = match pool {
                Some(p) => p[i % p.len()].clone(),
                None => random_codeword(code, &mut rng),
            };
            let (r, _) = channel.corrupt(&cw, &mut rng);
            Sample::new(r, cw)
        })
        .collect()
}

pub fn write_tsv<W: Write>(mut out: W, samples: &[Sample]) -> std::io::Result<()> {
    for s in samples {
        writeln!(out, "{}\t{}", s.received, s.target)?;
    }
    Ok(())
}

pub fn read_tsv<R: BufRead>(input: R) -> Result<Vec<Sample>, HarnessError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| HarnessError::Invalid(format!("line {}: {what}", i + 1));
        let (r, t) = line.split_once('\t').ok_or_else(|| bad("expected two tab-separated columns"))?;
        let received = r.trim().parse().map_err(|e| bad(&format!("{e}")))?;
        let target = t.trim().parse().map_err(|e| bad(&format!("{e}")))?;
        out.push(Sample::new(received, target));
    }
    Ok(out)
}

/// Fresh corruptions of a fixed codeword list every epoch.
pub struct CorruptingSource {
    codewords: Vec<BitWord>,
    task: Task,
    seed: u64,
}

impl CorruptingSource {
    pub fn new(codewords: Vec<BitWord>, task: Task, seed: u64) -> Self {
        Self { codewords, task, seed }
    }
}

impl SampleSource for CorruptingSource {
    fn len(&self) -> usize {
        self.codewords.len()
    }

    fn samples(&mut self, epoch: usize) -> Vec<Sample> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(epoch as u64);
        self.codewords
            .iter()
            .map(|cw| Sample::new(self.task.corrupt(cw, &mut rng), cw.clone()))
            .collect()
    }
}
