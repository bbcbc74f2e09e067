//! Transformer decoder for VT codes.
//!
//! The received word is embedded (per-position symbol vectors plus the two
//! position-sum statistics) as memory for a stack of windowed causal
//! decoder layers that emit the transmitted codeword one bit at a time.
//! Forward and backward passes are written out by hand over a flat
//! parameter store; matrix products use `matrixmultiply`.

pub mod checkpoint;
pub mod config;
pub mod embed;
pub mod error;
mod infer;
mod layers;
pub mod linalg;
pub mod mask;
pub mod model;
pub mod params;
pub mod train;

pub use checkpoint::{load, save, Checkpoint, TrainingMeta};
pub use config::TvtdConfig;
pub use embed::{prefix_stats, stat_sums, EmbeddingTables};
pub use error::TvtdError;
pub use mask::build_masks;
pub use model::{BatchStats, Sample, TvtdModel};
pub use params::{ParamId, ParamStore};
pub use train::{cosine_lr, train, Adam, EpochReport, SampleSource, TrainReport};
