//! Run errors split by exit code: validation failures exit 1, runtime
//! failures exit 2.

use sensus_core::corpus::CorpusError;
use sensus_core::metrics::MetricsError;
use sensus_core::regress::RegressError;
use sensus_core::stats::StatsError;
use sensus_core::synth::SynthError;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// Bad inputs: malformed files, impossible flag combinations, data that
    /// cannot support the requested analysis.
    #[error("{0}")]
    Validation(String),
    /// Environment trouble: IO, network, serialization of outputs.
    #[error("{0}")]
    Runtime(String),
}

impl RunError {
    pub fn validation(msg: impl Into<String>) -> Self {
        RunError::Validation(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        RunError::Runtime(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => 1,
            RunError::Runtime(_) => 2,
        }
    }
}

impl From<CorpusError> for RunError {
    fn from(e: CorpusError) -> Self {
        RunError::Validation(e.to_string())
    }
}

impl From<MetricsError> for RunError {
    fn from(e: MetricsError) -> Self {
        RunError::Validation(e.to_string())
    }
}

impl From<StatsError> for RunError {
    fn from(e: StatsError) -> Self {
        RunError::Validation(e.to_string())
    }
}

impl From<RegressError> for RunError {
    fn from(e: RegressError) -> Self {
        RunError::Validation(e.to_string())
    }
}

impl From<SynthError> for RunError {
    fn from(e: SynthError) -> Self {
        RunError::Validation(e.to_string())
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Runtime(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, RunError>;
