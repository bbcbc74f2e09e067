use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Bad user input; the CLI exits with status 2.
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Code(#[from] vt_core::CodeError),
    #[error(transparent)]
    Channel(#[from] vt_core::ChannelError),
    #[error(transparent)]
    Tvtd(#[from] vt_tvtd::TvtdError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            HarnessError::Invalid(_)
                | HarnessError::Code(_)
                | HarnessError::Channel(_)
                | HarnessError::Tvtd(
                    vt_tvtd::TvtdError::Config(_)
                        | vt_tvtd::TvtdError::CodeLength { .. }
                        | vt_tvtd::TvtdError::BadMagic
                        | vt_tvtd::TvtdError::Version { .. }
                        | vt_tvtd::TvtdError::Corrupt(_)
                        | vt_tvtd::TvtdError::Dtype { .. }
                )
        )
    }
}
