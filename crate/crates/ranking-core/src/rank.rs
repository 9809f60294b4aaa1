//! Rank transformation and purpose scoring.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::RankingError;
use crate::matrix::{EvaluationMatrix, TransformedMatrices};
use crate::spec::{validate_purpose_spec, PurposeSpec};
use crate::TOLERANCE;

/// Competition ranks over ascending sort keys: tied values share the minimum
/// position and the next distinct value gets `1 + count of strictly better`.
/// Values within `tolerance` of each other count as tied.
pub fn competition_ranks(keys: &[f64], tolerance: f64) -> Vec<u32> {
    keys.iter()
        .map(|ki| 1 + keys.iter().filter(|kj| **kj < ki - tolerance).count() as u32)
        .collect()
}

/// Turn every metric column a purpose references into inverted competition
/// ranks and route it to the desired or undesired matrix.
///
/// Generators are ordered per the metric's classification (ascending raw
/// value for lower-better, descending for higher-better, ascending distance
/// to the constant for closer-to-constant), competition-ranked with ties
/// sharing the minimum position, then each rank `r` becomes `|T| + 1 − r` so
/// that larger always means better.
pub fn transform(
    spec: &PurposeSpec,
    eval: &EvaluationMatrix,
) -> Result<TransformedMatrices, RankingError> {
    let n = eval.generators().len();
    if n == 0 {
        return Err(RankingError::EmptyMatrix);
    }

    let transform_side =
        |weights: &BTreeMap<String, f64>| -> Result<(Vec<String>, Vec<Vec<u32>>), RankingError> {
            let metrics: Vec<String> = weights.keys().cloned().collect();
            let mut columns = Vec::with_capacity(metrics.len());
            for metric in &metrics {
                let raw = eval
                    .column(metric)
                    .ok_or_else(|| RankingError::MissingMetric(metric.clone()))?;
                let class = spec
                    .classifications
                    .get(metric)
                    .ok_or_else(|| RankingError::UnclassifiedMetric(metric.clone()))?;
                let keys: Vec<f64> = raw.iter().map(|v| class.sort_key(*v)).collect();
                let inverted: Vec<u32> = competition_ranks(&keys, TOLERANCE)
                    .into_iter()
                    .map(|r| n as u32 + 1 - r)
                    .collect();
                columns.push(inverted);
            }
            // Transpose to one row per generator.
            let rows = (0..n)
                .map(|gi| columns.iter().map(|col| col[gi]).collect())
                .collect();
            Ok((metrics, rows))
        };

    let (desired_metrics, e_plus) = transform_side(&spec.desired_weights)?;
    let (undesired_metrics, e_minus) = transform_side(&spec.undesired_weights)?;

    Ok(TransformedMatrices {
        purpose: spec.purpose.clone(),
        generators: eval.generators().to_vec(),
        desired_metrics,
        undesired_metrics,
        e_plus,
        e_minus,
    })
}

/// One generator's scores and final rank for a purpose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    /// Generator identifier.
    pub generator: String,
    /// Weighted sum over desired inverted ranks.
    pub desired_score: f64,
    /// Weighted sum over undesired inverted ranks.
    pub undesired_score: f64,
    /// `desired_score − undesired_score`.
    pub overall_score: f64,
    /// Competition rank over overall scores (1 = best).
    pub rank: u32,
}

/// Final ranking for one purpose, best first; tied ranks are listed in
/// generator registration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingResult {
    /// The purpose this ranking answers.
    pub purpose: String,
    /// Entries sorted by rank, then registration order.
    pub entries: Vec<RankEntry>,
}

impl RankingResult {
    /// Rank of `generator`, if it was ranked.
    pub fn rank_of(&self, generator: &str) -> Option<u32> {
        self.entries
            .iter()
            .find(|e| e.generator == generator)
            .map(|e| e.rank)
    }

    /// `(labels, ranks)` aligned pairs, in list order.
    pub fn rank_pairs(&self) -> (Vec<String>, Vec<u32>) {
        (
            self.entries.iter().map(|e| e.generator.clone()).collect(),
            self.entries.iter().map(|e| e.rank).collect(),
        )
    }
}

/// Score and rank every generator for one purpose.
///
/// Per generator: `desired_score = Σ inverted_rank × metric_weight ×
/// category_weight` over desired metrics (likewise `undesired_score`), and
/// `overall = desired − undesired`. Overall scores are competition-ranked
/// descending (ties within [`TOLERANCE`] share a rank); among tied ranks the
/// output list keeps generator registration order.
pub fn rank_generators(
    spec: &PurposeSpec,
    tm: &TransformedMatrices,
) -> Result<RankingResult, RankingError> {
    let weighted_sum = |row: &[u32],
                        metrics: &[String],
                        weights: &BTreeMap<String, f64>|
     -> Result<f64, RankingError> {
        let mut sum = 0.0;
        for (mi, metric) in metrics.iter().enumerate() {
            let qi = spec
                .indicator_of(metric)
                .ok_or_else(|| RankingError::UnassignedMetric(metric.clone()))?;
            let qi_weight = spec
                .qi_weights
                .get(qi)
                .ok_or_else(|| RankingError::MissingIndicatorWeight(qi.to_string()))?;
            sum += f64::from(row[mi]) * weights[metric] * qi_weight;
        }
        Ok(sum)
    };

    let mut scored = Vec::with_capacity(tm.generators.len());
    for (gi, generator) in tm.generators.iter().enumerate() {
        let desired = weighted_sum(&tm.e_plus[gi], &tm.desired_metrics, &spec.desired_weights)?;
        let undesired = weighted_sum(
            &tm.e_minus[gi],
            &tm.undesired_metrics,
            &spec.undesired_weights,
        )?;
        scored.push((generator.clone(), desired, undesired, desired - undesired));
    }

    // Descending competition ranks: negate the keys and rank ascending.
    let keys: Vec<f64> = scored.iter().map(|(_, _, _, overall)| -overall).collect();
    let ranks = competition_ranks(&keys, TOLERANCE);

    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by_key(|&i| (ranks[i], i));

    let entries = order
        .into_iter()
        .map(|i| {
            let (generator, desired, undesired, overall) = scored[i].clone();
            RankEntry {
                generator,
                desired_score: desired,
                undesired_score: undesired,
                overall_score: overall,
                rank: ranks[i],
            }
        })
        .collect();

    Ok(RankingResult {
        purpose: spec.purpose.clone(),
        entries,
    })
}

/// Validate, transform, and rank every purpose against one matrix.
///
/// Fails fast on the first inadmissible spec or per-purpose error, annotated
/// with the purpose id. The result maps each purpose to its ranking and is
/// deterministic for identical inputs.
pub fn rank_all_purposes(
    specs: &[PurposeSpec],
    eval: &EvaluationMatrix,
) -> Result<BTreeMap<String, RankingResult>, RankingError> {
    let mut results = BTreeMap::new();
    for spec in specs {
        let report = validate_purpose_spec(spec);
        if !report.is_admissible() {
            return Err(RankingError::InvalidSpec {
                purpose: spec.purpose.clone(),
                violations: report.violations,
            });
        }
        let tm = transform(spec, eval).map_err(|e| e.in_purpose(&spec.purpose))?;
        let ranking = rank_generators(spec, &tm).map_err(|e| e.in_purpose(&spec.purpose))?;
        if results.insert(spec.purpose.clone(), ranking).is_some() {
            return Err(RankingError::InvalidSpec {
                purpose: spec.purpose.clone(),
                violations: vec!["duplicate purpose id".to_string()],
            });
        }
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::MetricClassification;
    use std::collections::BTreeSet;

    #[test]
    fn competition_ranks_share_minimum_position() {
        // 0.5 appears twice: both rank 2, next value rank 4.
        let ranks = competition_ranks(&[0.1, 0.5, 0.5, 0.9], TOLERANCE);
        assert_eq!(ranks, vec![1, 2, 2, 4]);
    }

    #[test]
    fn competition_ranks_merge_within_tolerance() {
        let ranks = competition_ranks(&[0.3, 0.3 + 1e-12, 0.4], TOLERANCE);
        assert_eq!(ranks, vec![1, 1, 3]);
    }

    #[test]
    fn competition_ranks_keep_distinct_values_apart() {
        let ranks = competition_ranks(&[0.3, 0.3 + 1e-6, 0.4], TOLERANCE);
        assert_eq!(ranks, vec![1, 2, 3]);
    }

    fn single_metric_spec(class: MetricClassification) -> PurposeSpec {
        PurposeSpec {
            purpose: "p".into(),
            qi_weights: [("qi".to_string(), 1.0)].into_iter().collect(),
            desired_weights: [("m".to_string(), 1.0)].into_iter().collect(),
            undesired_weights: BTreeMap::new(),
            classifications: [("m".to_string(), class)].into_iter().collect(),
            quality_indicators: vec![crate::QualityIndicator {
                name: "qi".into(),
                metrics: BTreeSet::from(["m".to_string()]),
            }],
        }
    }

    #[test]
    fn transform_inverts_lower_better_column() {
        let spec = single_metric_spec(MetricClassification::LowerBetter);
        let eval = EvaluationMatrix::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec!["m".into()],
            vec![vec![0.3], vec![0.1], vec![0.2]],
        )
        .unwrap();
        let tm = transform(&spec, &eval).unwrap();
        // Ranks ascending: b=1, c=2, a=3; inverted: b=3, c=2, a=1.
        assert_eq!(tm.e_plus, vec![vec![1], vec![3], vec![2]]);
        assert!(tm.e_minus.iter().all(|row| row.is_empty()));
    }

    #[test]
    fn transform_single_generator_gets_inverted_rank_one() {
        let spec = single_metric_spec(MetricClassification::HigherBetter);
        let eval = EvaluationMatrix::new(vec!["only".into()], vec!["m".into()], vec![vec![7.0]])
            .unwrap();
        let tm = transform(&spec, &eval).unwrap();
        assert_eq!(tm.e_plus, vec![vec![1]]);
    }

    #[test]
    fn transform_missing_metric_names_it() {
        let spec = single_metric_spec(MetricClassification::LowerBetter);
        let eval =
            EvaluationMatrix::new(vec!["a".into()], vec!["other".into()], vec![vec![1.0]])
                .unwrap();
        let err = transform(&spec, &eval).unwrap_err();
        assert!(err.to_string().contains("`m` missing"));
    }

    #[test]
    fn undesired_column_routes_to_e_minus() {
        let mut spec = single_metric_spec(MetricClassification::LowerBetter);
        spec.undesired_weights = std::mem::take(&mut spec.desired_weights);
        let eval = EvaluationMatrix::new(
            vec!["a".into(), "b".into()],
            vec!["m".into()],
            vec![vec![0.2], vec![0.1]],
        )
        .unwrap();
        let tm = transform(&spec, &eval).unwrap();
        assert_eq!(tm.e_minus, vec![vec![1], vec![2]]);
        assert!(tm.e_plus.iter().all(|row| row.is_empty()));
    }

    #[test]
    fn empty_weight_side_scores_zero() {
        let spec = single_metric_spec(MetricClassification::LowerBetter);
        let eval = EvaluationMatrix::new(
            vec!["a".into(), "b".into()],
            vec!["m".into()],
            vec![vec![0.2], vec![0.1]],
        )
        .unwrap();
        let tm = transform(&spec, &eval).unwrap();
        let result = rank_generators(&spec, &tm).unwrap();
        assert!(result.entries.iter().all(|e| e.undesired_score == 0.0));
        assert_eq!(result.rank_of("b"), Some(1));
        assert_eq!(result.rank_of("a"), Some(2));
    }

    #[test]
    fn identical_raw_columns_share_rank_and_keep_registration_order() {
        let spec = single_metric_spec(MetricClassification::LowerBetter);
        let eval = EvaluationMatrix::new(
            vec!["z_first".into(), "a_second".into()],
            vec!["m".into()],
            vec![vec![0.5], vec![0.5]],
        )
        .unwrap();
        let tm = transform(&spec, &eval).unwrap();
        let result = rank_generators(&spec, &tm).unwrap();
        assert_eq!(result.entries[0].generator, "z_first");
        assert_eq!(result.entries[1].generator, "a_second");
        assert_eq!(result.entries[0].rank, 1);
        assert_eq!(result.entries[1].rank, 1);
    }

    #[test]
    fn overall_is_desired_minus_undesired() {
        let mut spec = single_metric_spec(MetricClassification::LowerBetter);
        spec.desired_weights = [("m".to_string(), 1.0)].into_iter().collect();
        spec.undesired_weights = [("u".to_string(), 1.0)].into_iter().collect();
        spec.classifications
            .insert("u".to_string(), MetricClassification::HigherBetter);
        spec.quality_indicators[0].metrics.insert("u".to_string());
        let eval = EvaluationMatrix::new(
            vec!["a".into(), "b".into()],
            vec!["m".into(), "u".into()],
            vec![vec![0.1, 5.0], vec![0.2, 3.0]],
        )
        .unwrap();
        let tm = transform(&spec, &eval).unwrap();
        let result = rank_generators(&spec, &tm).unwrap();
        for entry in &result.entries {
            assert_eq!(
                entry.overall_score,
                entry.desired_score - entry.undesired_score
            );
        }
        // a: desired 2 (best on m), undesired 2 (5.0 higher) → 0.
        // b: desired 1, undesired 1 → 0. Tied overall.
        assert_eq!(result.entries[0].rank, 1);
        assert_eq!(result.entries[1].rank, 1);
    }

    #[test]
    fn rank_all_purposes_empty_list_is_empty_map() {
        let eval =
            EvaluationMatrix::new(vec!["a".into()], vec!["m".into()], vec![vec![1.0]]).unwrap();
        let map = rank_all_purposes(&[], &eval).unwrap();
        assert!(map.is_empty());
    }

    #[test]
    fn rank_all_purposes_single_generator_ranks_first() {
        let spec = single_metric_spec(MetricClassification::LowerBetter);
        let eval =
            EvaluationMatrix::new(vec!["a".into()], vec!["m".into()], vec![vec![1.0]]).unwrap();
        let map = rank_all_purposes(std::slice::from_ref(&spec), &eval).unwrap();
        assert_eq!(map["p"].rank_of("a"), Some(1));
    }

    #[test]
    fn rank_all_purposes_rejects_inadmissible_spec() {
        let mut spec = single_metric_spec(MetricClassification::LowerBetter);
        spec.desired_weights.insert("m".to_string(), 0.5); // sum no longer 1
        let eval =
            EvaluationMatrix::new(vec!["a".into()], vec!["m".into()], vec![vec![1.0]]).unwrap();
        let err = rank_all_purposes(std::slice::from_ref(&spec), &eval).unwrap_err();
        assert!(matches!(err, RankingError::InvalidSpec { .. }));
    }

    #[test]
    fn rank_all_purposes_rejects_duplicate_purpose() {
        let spec = single_metric_spec(MetricClassification::LowerBetter);
        let eval =
            EvaluationMatrix::new(vec!["a".into()], vec!["m".into()], vec![vec![1.0]]).unwrap();
        let err = rank_all_purposes(&[spec.clone(), spec], &eval).unwrap_err();
        assert!(err.to_string().contains("duplicate purpose"));
    }
}
