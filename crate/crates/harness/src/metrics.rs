//! Error-rate reports.
//!
//! JSON schema `vt-metrics/1`, one object per evaluation:
//!
//! ```text
//! schema           "vt-metrics/1"
//! n, a             code parameters
//! channel          {"mode": "fixed_count", "k": K} or {"mode": "iid", "rate": R},
//!                  plus "type_weights": [ins, del, sub]
//! decoder          "hd" | "siso" | "tvtd"
//! trials, seed
//! scope            "codeword" (all n bits) or "message" (the y payload bits)
//! bits_per_frame
//! bit_errors, frame_errors, fallbacks
//! ber, fer, one_minus_ber, one_minus_fer
//! ber_ci95, fer_ci95   half-widths of normal-approximation 95% intervals
//! wall_clock_seconds   only when timing was requested
//! ```
//!
//! Without timing the report is a pure function of its inputs, so seeded
//! reruns serialize to identical bytes.

use serde::{Deserialize, Serialize};
use vt_core::ChannelSpec;

pub const SCHEMA: &str = "vt-metrics/1";

/// Raw counts; merging is plain addition, so any split of the trials gives
/// the same totals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub fallbacks: u64,
}

impl std::ops::Add for Counts {
    type Output = Counts;
    fn add(self, o: Counts) -> Counts {
        Counts {
            frames: self.frames + o.frames,
            bit_errors: self.bit_errors + o.bit_errors,
            frame_errors: self.frame_errors + o.frame_errors,
            fallbacks: self.fallbacks + o.fallbacks,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Codeword,
    Message,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema: String,
    pub n: usize,
    pub a: usize,
    pub channel: ChannelSpec,
    pub decoder: String,
    pub trials: u64,
    pub seed: u64,
    pub scope: Scope,
    pub bits_per_frame: usize,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub fallbacks: u64,
    pub ber: f64,
    pub fer: f64,
    pub one_minus_ber: f64,
    pub one_minus_fer: f64,
    pub ber_ci95: f64,
    pub fer_ci95: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_clock_seconds: Option<f64>,
}

/// Half-width of the normal-approximation 95% interval for a proportion.
pub fn ci95(p: f64, samples: u64) -> f64 {
    if samples == 0 {
        return 0.0;
    }
    1.96 * (p * (1.0 - p) / samples as f64).sqrt()
}

pub struct ReportContext<'a> {
    pub n: usize,
    pub a: usize,
    pub channel: ChannelSpec,
    pub decoder: &'a str,
    pub seed: u64,
    pub scope: Scope,
    pub bits_per_frame: usize,
}

impl MetricsReport {
    pub fn from_counts(ctx: ReportContext<'_>, c: Counts) -> Self {
        let bits = c.frames * ctx.bits_per_frame as u64;
        let ber = if bits == 0 { 0.0 } else { c.bit_errors as f64 / bits as f64 };
        let fer = if c.frames == 0 {
            0.0
        } else {
            c.frame_errors as f64 / c.frames as f64
        };
        Self {
            schema: SCHEMA.to_string(),
            n: ctx.n,
            a: ctx.a,
            channel: ctx.channel,
            decoder: ctx.decoder.to_string(),
            trials: c.frames,
            seed: ctx.seed,
            scope: ctx.scope,
            bits_per_frame: ctx.bits_per_frame,
            bit_errors: c.bit_errors,
            frame_errors: c.frame_errors,
            fallbacks: c.fallbacks,
            ber,
            fer,
            one_minus_ber: 1.0 - ber,
            one_minus_fer: 1.0 - fer,
            ber_ci95: ci95(ber, bits),
            fer_ci95: ci95(fer, c.frames),
            wall_clock_seconds: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn channel_label(&self) -> String {
        match self.channel.mode {
            vt_core::ChannelMode::FixedCount { k } => format!("fixed:{k}"),
            vt_core::ChannelMode::Iid { rate } => format!("iid:{rate}"),
        }
    }
}

/// Plain-text table in the 1-BER / 1-FER (percent) convention.
pub fn format_table(reports: &[MetricsReport]) -> String {
    let mut s = format!(
        "{:<8} {:<10} {:>8} {:>10} {:>10} {:>9}\n",
        "decoder", "channel", "trials", "1-BER(%)", "1-FER(%)", "+-FER(%)"
    );
    for r in reports {
        s.push_str(&format!(
            "{:<8} {:<10} {:>8} {:>10.2} {:>10.2} {:>9.2}\n",
            r.decoder,
            r.channel_label(),
            r.trials,
            100.0 * r.one_minus_ber,
            100.0 * r.one_minus_fer,
            100.0 * r.fer_ci95
        ));
    }
    s
}
