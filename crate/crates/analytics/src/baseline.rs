//! Baseline scorers: simpler ranking methods used as comparison points.

use std::collections::BTreeMap;

use ranking_core::{competition_ranks, EvaluationMatrix, MetricClassification, TOLERANCE};

use crate::error::AnalyticsError;
use crate::vector::RankVector;

fn check_weights(weights: &BTreeMap<String, f64>) -> Result<(), AnalyticsError> {
    let sum: f64 = weights.values().sum();
    if (sum - 1.0).abs() > TOLERANCE {
        return Err(AnalyticsError::BadWeightSum(sum));
    }
    Ok(())
}

fn column_and_class<'a>(
    eval: &EvaluationMatrix,
    classifications: &'a BTreeMap<String, MetricClassification>,
    metric: &str,
) -> Result<(Vec<f64>, &'a MetricClassification), AnalyticsError> {
    let column = eval
        .column(metric)
        .ok_or_else(|| AnalyticsError::UnknownMetric(metric.to_string()))?;
    let class = classifications
        .get(metric)
        .ok_or_else(|| AnalyticsError::UnclassifiedMetric(metric.to_string()))?;
    Ok((column, class))
}

/// Weighted min-max normalized average score, ranked descending.
///
/// Each metric column is normalized to [0, 1] oriented so 1 is best
/// (higher-better: `(v−min)/(max−min)`; lower-better: `(max−v)/(max−min)`;
/// closer-to-constant: `1 − |v−C| / max|v_k−C|`). A degenerate column — all
/// values equal, or all exactly at the constant — normalizes to all 1.
/// Scores are the weighted sums; ranks are competition ranks, best first.
pub fn baseline_weighted_normalized_average(
    eval: &EvaluationMatrix,
    weights: &BTreeMap<String, f64>,
    classifications: &BTreeMap<String, MetricClassification>,
) -> Result<RankVector, AnalyticsError> {
    check_weights(weights)?;
    let n = eval.generators().len();
    let mut scores = vec![0.0; n];
    for (metric, weight) in weights {
        let (column, class) = column_and_class(eval, classifications, metric)?;
        let normalized: Vec<f64> = match *class {
            MetricClassification::HigherBetter => {
                let min = column.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = column.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if max == min {
                    vec![1.0; n]
                } else {
                    column.iter().map(|v| (v - min) / (max - min)).collect()
                }
            }
            MetricClassification::LowerBetter => {
                let min = column.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = column.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if max == min {
                    vec![1.0; n]
                } else {
                    column.iter().map(|v| (max - v) / (max - min)).collect()
                }
            }
            MetricClassification::CloserToConstant { constant } => {
                let max_distance = column
                    .iter()
                    .map(|v| (v - constant).abs())
                    .fold(0.0, f64::max);
                if max_distance == 0.0 {
                    vec![1.0; n]
                } else {
                    column
                        .iter()
                        .map(|v| 1.0 - (v - constant).abs() / max_distance)
                        .collect()
                }
            }
        };
        for (score, norm) in scores.iter_mut().zip(&normalized) {
            *score += weight * norm;
        }
    }
    // Descending: negate and rank ascending.
    let keys: Vec<f64> = scores.iter().map(|s| -s).collect();
    RankVector::new(
        eval.generators().to_vec(),
        competition_ranks(&keys, TOLERANCE),
    )
}

/// Weighted per-metric rank average, ranked ascending.
///
/// Each metric column is competition-ranked per its classification (1 =
/// best); a generator's score is the weighted average of its ranks; final
/// ranks order scores ascending (lower mean rank = better), competition ties.
pub fn baseline_weighted_rank_derived(
    eval: &EvaluationMatrix,
    weights: &BTreeMap<String, f64>,
    classifications: &BTreeMap<String, MetricClassification>,
) -> Result<RankVector, AnalyticsError> {
    check_weights(weights)?;
    let n = eval.generators().len();
    let mut scores = vec![0.0; n];
    for (metric, weight) in weights {
        let (column, class) = column_and_class(eval, classifications, metric)?;
        let keys: Vec<f64> = column.iter().map(|v| class.sort_key(*v)).collect();
        let ranks = competition_ranks(&keys, TOLERANCE);
        for (score, rank) in scores.iter_mut().zip(&ranks) {
            *score += weight * f64::from(*rank);
        }
    }
    RankVector::new(
        eval.generators().to_vec(),
        competition_ranks(&scores, TOLERANCE),
    )
}
