//! Purpose specifications: quality indicators, metric weights, classifications.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::classification::MetricClassification;
use crate::TOLERANCE;

/// A named category of metrics (e.g. data utility vs. data privacy).
///
/// Within one purpose the metric sets of distinct indicators are disjoint:
/// each metric maps to exactly one indicator for weight lookup.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityIndicator {
    /// Indicator name, the key into a purpose's category weights.
    pub name: String,
    /// The metrics this indicator covers.
    pub metrics: BTreeSet<String>,
}

/// Everything needed to rank generators for one purpose.
///
/// `desired_weights` and `undesired_weights` are rows of the two metric
/// weight matrices; `qi_weights` is the purpose's row of the category weight
/// matrix. Maps are ordered so serialization is canonical by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurposeSpec {
    /// Purpose identifier.
    pub purpose: String,
    /// Quality-indicator name → weight in [0, 1]; sums to 1.
    pub qi_weights: BTreeMap<String, f64>,
    /// Desired metric → weight in [0, 1]; sums to 1 when non-empty.
    pub desired_weights: BTreeMap<String, f64>,
    /// Undesired metric → weight in [0, 1]; sums to 1 when non-empty.
    pub undesired_weights: BTreeMap<String, f64>,
    /// Metric → classification for every metric the purpose references.
    pub classifications: BTreeMap<String, MetricClassification>,
    /// The quality indicators partitioning the purpose's metrics.
    pub quality_indicators: Vec<QualityIndicator>,
}

impl PurposeSpec {
    /// Name of the quality indicator that owns `metric`, if any.
    pub fn indicator_of(&self, metric: &str) -> Option<&str> {
        self.quality_indicators
            .iter()
            .find(|qi| qi.metrics.contains(metric))
            .map(|qi| qi.name.as_str())
    }

    /// All weighted metrics: desired first, then undesired, each in map order.
    pub fn weighted_metrics(&self) -> impl Iterator<Item = &String> {
        self.desired_weights
            .keys()
            .chain(self.undesired_weights.keys())
    }
}

/// Outcome of validating a [`PurposeSpec`]: every violated constraint, or
/// empty when the spec is admissible.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Human-readable description of each violated constraint.
    pub violations: Vec<String>,
}

impl ValidationReport {
    /// True when no constraint was violated.
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }
}

fn check_weight_range(map: &BTreeMap<String, f64>, what: &str, out: &mut Vec<String>) {
    for (key, w) in map {
        if !w.is_finite() || *w < 0.0 || *w > 1.0 {
            out.push(format!("{what} weight for `{key}` is {w}, outside [0, 1]"));
        }
    }
}

fn check_weight_sum(map: &BTreeMap<String, f64>, what: &str, out: &mut Vec<String>) {
    if map.is_empty() {
        return;
    }
    let sum: f64 = map.values().sum();
    if (sum - 1.0).abs() > TOLERANCE {
        out.push(format!("{what} weights sum {sum} ≠ 1"));
    }
}

/// Check a purpose spec against every structural constraint.
///
/// Constraints: category weights sum to 1; desired/undesired weights sum to 1
/// when non-empty (an empty side is admissible and contributes zero); all
/// weights lie in [0, 1]; desired and undesired metric sets are disjoint;
/// every weighted metric belongs to exactly one quality indicator, has a
/// classification, and its indicator has a weight entry.
pub fn validate_purpose_spec(spec: &PurposeSpec) -> ValidationReport {
    let mut violations = Vec::new();

    check_weight_range(&spec.qi_weights, "quality indicator", &mut violations);
    check_weight_range(&spec.desired_weights, "desired", &mut violations);
    check_weight_range(&spec.undesired_weights, "undesired", &mut violations);

    if spec.qi_weights.is_empty() {
        violations.push("no quality indicator weights".to_string());
    }
    check_weight_sum(&spec.qi_weights, "quality indicator", &mut violations);
    check_weight_sum(&spec.desired_weights, "desired", &mut violations);
    check_weight_sum(&spec.undesired_weights, "undesired", &mut violations);

    for metric in spec.desired_weights.keys() {
        if spec.undesired_weights.contains_key(metric) {
            violations.push(format!("metric `{metric}` is both desired and undesired"));
        }
    }

    // Indicator metric sets must be pairwise disjoint.
    let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
    for qi in &spec.quality_indicators {
        for metric in &qi.metrics {
            if let Some(other) = seen.insert(metric.as_str(), qi.name.as_str()) {
                violations.push(format!(
                    "metric `{metric}` belongs to indicators `{other}` and `{}`",
                    qi.name
                ));
            }
        }
    }

    for metric in spec.weighted_metrics() {
        match spec.indicator_of(metric) {
            None => violations.push(format!(
                "metric `{metric}` carries a weight but belongs to no quality indicator"
            )),
            Some(qi) => {
                if !spec.qi_weights.contains_key(qi) {
                    violations.push(format!(
                        "quality indicator `{qi}` (owning metric `{metric}`) has no weight"
                    ));
                }
            }
        }
        if !spec.classifications.contains_key(metric) {
            violations.push(format!("metric `{metric}` has no classification"));
        }
    }

    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn utility_privacy_indicators() -> Vec<QualityIndicator> {
        vec![
            QualityIndicator {
                name: "data_utility".into(),
                metrics: ["PCD", "LC", "CRRS", "CRSR", "SC"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
            },
            QualityIndicator {
                name: "data_privacy".into(),
                metrics: ["AD", "MDP", "MDR"].iter().map(|s| s.to_string()).collect(),
            },
        ]
    }

    fn classifications() -> BTreeMap<String, MetricClassification> {
        let mut m = BTreeMap::new();
        for lower in ["PCD", "AD", "LC", "MDP", "MDR"] {
            m.insert(lower.to_string(), MetricClassification::LowerBetter);
        }
        m.insert("SC".to_string(), MetricClassification::HigherBetter);
        for close in ["CRRS", "CRSR"] {
            m.insert(
                close.to_string(),
                MetricClassification::CloserToConstant { constant: 1.0 },
            );
        }
        m
    }

    fn uniform_spec() -> PurposeSpec {
        // Eight desired metrics at 0.125 each, category weights 0.5/0.5.
        let metrics = ["PCD", "LC", "CRRS", "CRSR", "SC", "AD", "MDP", "MDR"];
        PurposeSpec {
            purpose: "Purpose A".into(),
            qi_weights: [("data_utility", 0.5), ("data_privacy", 0.5)]
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            desired_weights: metrics.iter().map(|m| (m.to_string(), 0.125)).collect(),
            undesired_weights: BTreeMap::new(),
            classifications: classifications(),
            quality_indicators: utility_privacy_indicators(),
        }
    }

    #[test]
    fn uniform_spec_is_admissible() {
        let report = validate_purpose_spec(&uniform_spec());
        assert!(report.is_admissible(), "violations: {:?}", report.violations);
    }

    #[test]
    fn short_weight_sum_is_reported() {
        let mut spec = uniform_spec();
        spec.desired_weights =
            [("PCD".to_string(), 0.5), ("SC".to_string(), 0.4)].into_iter().collect();
        let report = validate_purpose_spec(&spec);
        assert!(report
            .violations
            .iter()
            .any(|v| v.contains("desired weights sum 0.9")));
    }

    #[test]
    fn overlapping_desired_undesired_is_reported() {
        let mut spec = uniform_spec();
        spec.desired_weights = [("AD".to_string(), 1.0)].into_iter().collect();
        spec.undesired_weights = [("AD".to_string(), 1.0)].into_iter().collect();
        let report = validate_purpose_spec(&spec);
        assert!(report
            .violations
            .iter()
            .any(|v| v.contains("both desired and undesired")));
    }

    #[test]
    fn empty_undesired_side_is_admissible() {
        let spec = uniform_spec();
        assert!(spec.undesired_weights.is_empty());
        assert!(validate_purpose_spec(&spec).is_admissible());
    }

    #[test]
    fn orphan_metric_is_reported() {
        let mut spec = uniform_spec();
        spec.desired_weights.insert("XX".to_string(), 0.0);
        // Keep the sum at 1: the new metric carries zero weight.
        let report = validate_purpose_spec(&spec);
        assert!(report
            .violations
            .iter()
            .any(|v| v.contains("`XX` carries a weight but belongs to no quality indicator")));
        assert!(report
            .violations
            .iter()
            .any(|v| v.contains("`XX` has no classification")));
    }

    #[test]
    fn missing_indicator_weight_is_reported() {
        let mut spec = uniform_spec();
        spec.qi_weights.remove("data_privacy");
        spec.qi_weights.insert("data_utility".to_string(), 1.0);
        let report = validate_purpose_spec(&spec);
        assert!(report
            .violations
            .iter()
            .any(|v| v.contains("`data_privacy`") && v.contains("has no weight")));
    }

    #[test]
    fn out_of_range_weight_is_reported() {
        let mut spec = uniform_spec();
        spec.qi_weights.insert("data_utility".to_string(), 1.5);
        spec.qi_weights.insert("data_privacy".to_string(), -0.5);
        let report = validate_purpose_spec(&spec);
        assert_eq!(
            report.violations.iter().filter(|v| v.contains("outside [0, 1]")).count(),
            2
        );
    }
}
