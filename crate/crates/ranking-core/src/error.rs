//! Error type shared by the ranking pipeline.

use thiserror::Error;

/// Failure modes of spec validation, transformation, and ranking.
#[derive(Debug, Error)]
pub enum RankingError {
    /// The evaluation matrix contains no generators.
    #[error("evaluation matrix has no generators")]
    EmptyMatrix,

    /// Matrix construction found duplicate names, ragged rows, or a
    /// non-finite cell.
    #[error("malformed evaluation matrix: {0}")]
    MalformedMatrix(String),

    /// A weighted metric has no column in the evaluation matrix.
    #[error("metric column `{0}` missing from evaluation matrix")]
    MissingMetric(String),

    /// A weighted metric is not claimed by any quality indicator.
    #[error("metric `{0}` carries a weight but belongs to no quality indicator")]
    UnassignedMetric(String),

    /// A weighted metric has no classification entry.
    #[error("metric `{0}` has no classification")]
    UnclassifiedMetric(String),

    /// A metric's quality indicator has no weight in the purpose spec.
    #[error("quality indicator `{0}` has no weight entry")]
    MissingIndicatorWeight(String),

    /// The purpose spec failed validation; every violation is listed.
    #[error("purpose `{purpose}` failed validation: {}", violations.join("; "))]
    InvalidSpec {
        purpose: String,
        violations: Vec<String>,
    },

    /// Wraps an inner error with the purpose a multi-purpose run was
    /// processing when it occurred.
    #[error("purpose `{purpose}`: {source}")]
    InPurpose {
        purpose: String,
        #[source]
        source: Box<RankingError>,
    },
}

impl RankingError {
    /// Annotate this error with the purpose it occurred in.
    pub fn in_purpose(self, purpose: &str) -> RankingError {
        RankingError::InPurpose {
            purpose: purpose.to_string(),
            source: Box::new(self),
        }
    }
}
