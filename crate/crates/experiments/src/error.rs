//! Error type shared by the corpus loader, the pipelines, and the runners.

use thiserror::Error;

/// Anything that can go wrong while reproducing a scenario.
#[derive(Debug, Error)]
pub enum ExperimentError {
    /// The embedded corpus is damaged or fails validation.
    #[error("corpus: {0}")]
    Corpus(String),

    /// A simulated node or the client layer refused an operation.
    #[error("pipeline: {0}")]
    Pipeline(String),

    /// A scenario asked for something the harness cannot provide.
    #[error("scenario: {0}")]
    Scenario(String),

    /// Ranking mathematics rejected an input.
    #[error(transparent)]
    Ranking(#[from] ranking_core::RankingError),

    /// Correlation or baseline computation rejected an input.
    #[error(transparent)]
    Analytics(#[from] analytics::AnalyticsError),

    /// Report files could not be written.
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    /// A document failed to serialize; indicates a bug, not bad input.
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<synthrank::error::CliError> for ExperimentError {
    fn from(error: synthrank::error::CliError) -> Self {
        ExperimentError::Pipeline(error.to_string())
    }
}

impl From<node_service::ServiceError> for ExperimentError {
    fn from(error: node_service::ServiceError) -> Self {
        ExperimentError::Pipeline(error.to_string())
    }
}

impl From<consensus_pbft::ConsensusError> for ExperimentError {
    fn from(error: consensus_pbft::ConsensusError) -> Self {
        ExperimentError::Pipeline(error.to_string())
    }
}
