//! Experiment harness for VT codes: datasets, Monte Carlo evaluation of the
//! hard-decision, SISO and transformer decoders, timing and ablation grids.

pub mod ablation;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod metrics;
pub mod timing;

pub use ablation::{ablation_suite, AblationKind, AblationPlan, AblationRow};
pub use dataset::{gen_dataset, split_codebook, CodebookSplit, CorruptingSource, Task};
pub use error::HarnessError;
pub use eval::{evaluate, parse_channel, parse_code, Decoded, Decoder, ExperimentSpec};
pub use metrics::{format_table, MetricsReport, Scope};
pub use timing::{time_decoders, TimingReport};
