use thiserror::Error;

#[derive(Debug, Error)]
pub enum TvtdError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("word of length {len} exceeds the position table ({max} positions)")]
    LengthOverflow { len: usize, max: usize },
    #[error("statistic key {key} exceeds the table range 0..={max}")]
    KeyOverflow { key: usize, max: usize },
    #[error("target word has {found} bits, model decodes n = {expected}")]
    TargetLength { expected: usize, found: usize },
    #[error("non-finite loss at epoch {epoch}, step {step}")]
    NonFiniteLoss { epoch: usize, step: usize },
    #[error("empty training set")]
    EmptyDataset,
    #[error("not a checkpoint file")]
    BadMagic,
    #[error("checkpoint format version {found}, this build reads {expected}")]
    Version { expected: u32, found: u32 },
    #[error("checkpoint is for n = {found}, expected n = {expected}")]
    CodeLength { expected: usize, found: usize },
    #[error("checkpoint stores {found} parameters, model uses {expected}")]
    Dtype { expected: &'static str, found: String },
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
