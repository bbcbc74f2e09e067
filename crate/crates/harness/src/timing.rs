//! Wall-clock comparison of decoders on one shared set of received words.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use vt_core::{BitWord, ChannelSpec, VtParams};

use crate::eval::{Decoder, ExperimentSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingEntry {
    pub decoder: String,
    pub words: usize,
    pub seconds: f64,
    pub words_per_second: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub n: usize,
    pub channel: ChannelSpec,
    pub entries: Vec<TimingEntry>,
    /// Architecture, OS and thread count the numbers were taken on.
    pub hardware: String,
}

impl TimingReport {
    pub fn seconds(&self, decoder: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.decoder == decoder).map(|e| e.seconds)
    }

    pub fn format_table(&self) -> String {
        let mut s = format!("{:<8} {:>8} {:>12} {:>14}\n", "decoder", "words", "seconds", "words/s");
        for e in &self.entries {
            s.push_str(&format!(
                "{:<8} {:>8} {:>12.6} {:>14.1}\n",
                e.decoder, e.words, e.seconds, e.words_per_second
            ));
        }
        s.push_str(&format!("hardware: {}\n", self.hardware));
        s
    }
}

pub fn hardware_note() -> String {
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    format!(
        "{} {}, {} hardware threads, single-threaded decode",
        std::env::consts::ARCH,
        std::env::consts::OS,
        threads
    )
}

/// Decodes the same `count` received words with each decoder on the calling
/// thread. TVTD decodes in batches of 256 words.
pub fn time_decoders(
    code: &VtParams,
    channel: &ChannelSpec,
    count: usize,
    seed: u64,
    decoders: &[Decoder],
) -> TimingReport {
    let spec = ExperimentSpec::new(code.clone(), *channel, Decoder::Hd, count, seed);
    let received: Vec<BitWord> = (0..count).map(|i| spec.trial(i).1).collect();
    let entries = decoders
        .iter()
        .map(|d| {
            let start = Instant::now();
            for chunk in received.chunks(256) {
                std::hint::black_box(d.decode_batch(chunk, code, channel));
            }
            let seconds = start.elapsed().as_secs_f64();
            TimingEntry {
                decoder: d.name().to_string(),
                words: count,
                seconds,
                words_per_second: if seconds > 0.0 { count as f64 / seconds } else { f64::INFINITY },
            }
        })
        .collect();
    TimingReport {
        n: code.n(),
        channel: *channel,
        entries,
        hardware: hardware_note(),
    }
}
