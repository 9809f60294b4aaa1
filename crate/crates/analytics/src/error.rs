//! Error type for correlation and baseline computations.

use thiserror::Error;

/// Failure modes of rank comparison and baseline scoring.
#[derive(Debug, Error)]
pub enum AnalyticsError {
    /// Labels and ranks differ in length, or a rank is zero.
    #[error("malformed rank vector: {0}")]
    MalformedVector(String),

    /// The two vectors do not rank the same label set.
    #[error("rank vectors disagree on labels: {0}")]
    MismatchedLabels(String),

    /// Fewer than two items; correlations are undefined.
    #[error("need at least two ranked items, got {0}")]
    TooFewItems(usize),

    /// Every pair is tied in one vector; the tie-adjusted denominator is zero.
    #[error("tie-adjusted tau undefined: all items tied in one vector")]
    AllTied,

    /// A weighted metric has no column in the evaluation matrix.
    #[error("metric `{0}` not present in evaluation matrix")]
    UnknownMetric(String),

    /// A weighted metric has no classification.
    #[error("metric `{0}` has no classification")]
    UnclassifiedMetric(String),

    /// Weights do not sum to 1.
    #[error("weights sum {0} ≠ 1")]
    BadWeightSum(f64),
}
