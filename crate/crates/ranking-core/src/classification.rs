//! Metric classifications: the direction in which a raw metric value is "good".

use serde::{Deserialize, Serialize};

/// How a metric's raw value maps to quality.
///
/// Every metric referenced by a purpose carries exactly one classification;
/// it decides the sort direction used when ranking generators on that metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricClassification {
    /// Lower raw values indicate better performance.
    LowerBetter,
    /// Higher raw values indicate better performance.
    HigherBetter,
    /// Values closer to a fixed constant indicate better performance.
    CloserToConstant {
        /// The ideal value the metric should approach.
        constant: f64,
    },
}

impl MetricClassification {
    /// Ascending sort key for a raw value: smaller key = better generator.
    pub fn sort_key(&self, value: f64) -> f64 {
        match *self {
            MetricClassification::LowerBetter => value,
            MetricClassification::HigherBetter => -value,
            MetricClassification::CloserToConstant { constant } => (value - constant).abs(),
        }
    }
}
