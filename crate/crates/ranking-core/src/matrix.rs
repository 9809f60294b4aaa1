//! Evaluation matrices: raw metric scores and their rank-transformed form.

use serde::{Deserialize, Serialize};

use crate::error::RankingError;

/// Raw metric scores: one row per generator, one column per metric.
///
/// Generator order is the registration order and is preserved verbatim; it
/// decides list order among tied generators in the final ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEvaluationMatrix")]
pub struct EvaluationMatrix {
    generators: Vec<String>,
    metrics: Vec<String>,
    scores: Vec<Vec<f64>>,
}

/// Unvalidated mirror of [`EvaluationMatrix`] used during deserialization.
#[derive(Debug, Deserialize)]
struct RawEvaluationMatrix {
    generators: Vec<String>,
    metrics: Vec<String>,
    scores: Vec<Vec<f64>>,
}

impl TryFrom<RawEvaluationMatrix> for EvaluationMatrix {
    type Error = RankingError;

    fn try_from(raw: RawEvaluationMatrix) -> Result<Self, Self::Error> {
        EvaluationMatrix::new(raw.generators, raw.metrics, raw.scores)
    }
}

impl EvaluationMatrix {
    /// Build a matrix, checking shape, duplicates, and finiteness.
    pub fn new(
        generators: Vec<String>,
        metrics: Vec<String>,
        scores: Vec<Vec<f64>>,
    ) -> Result<Self, RankingError> {
        if generators.is_empty() {
            return Err(RankingError::EmptyMatrix);
        }
        if scores.len() != generators.len() {
            return Err(RankingError::MalformedMatrix(format!(
                "{} generators but {} score rows",
                generators.len(),
                scores.len()
            )));
        }
        for (gen, row) in generators.iter().zip(&scores) {
            if row.len() != metrics.len() {
                return Err(RankingError::MalformedMatrix(format!(
                    "row for `{gen}` has {} cells, expected {}",
                    row.len(),
                    metrics.len()
                )));
            }
            if let Some(pos) = row.iter().position(|v| !v.is_finite()) {
                return Err(RankingError::MalformedMatrix(format!(
                    "non-finite score for `{gen}` on `{}`",
                    metrics[pos]
                )));
            }
        }
        for (i, gen) in generators.iter().enumerate() {
            if generators[..i].contains(gen) {
                return Err(RankingError::MalformedMatrix(format!(
                    "duplicate generator `{gen}`"
                )));
            }
        }
        for (i, metric) in metrics.iter().enumerate() {
            if metrics[..i].contains(metric) {
                return Err(RankingError::MalformedMatrix(format!(
                    "duplicate metric `{metric}`"
                )));
            }
        }
        Ok(EvaluationMatrix {
            generators,
            metrics,
            scores,
        })
    }

    /// Generator identifiers in registration order.
    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    /// Metric identifiers in column order.
    pub fn metrics(&self) -> &[String] {
        &self.metrics
    }

    /// The raw scores of one metric across all generators, in generator order.
    pub fn column(&self, metric: &str) -> Option<Vec<f64>> {
        let idx = self.metrics.iter().position(|m| m == metric)?;
        Some(self.scores.iter().map(|row| row[idx]).collect())
    }

    /// Raw score of one generator on one metric.
    pub fn value(&self, generator: &str, metric: &str) -> Option<f64> {
        let gi = self.generators.iter().position(|g| g == generator)?;
        let mi = self.metrics.iter().position(|m| m == metric)?;
        Some(self.scores[gi][mi])
    }
}

/// Per-purpose inverted-rank matrices: desired columns in `e_plus`,
/// undesired columns in `e_minus`. Every entry lies in `[1, |T|]` and higher
/// means better.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformedMatrices {
    /// The purpose these matrices were computed for.
    pub purpose: String,
    /// Generator identifiers, same order as the rows.
    pub generators: Vec<String>,
    /// Desired metrics, same order as `e_plus` columns.
    pub desired_metrics: Vec<String>,
    /// Undesired metrics, same order as `e_minus` columns.
    pub undesired_metrics: Vec<String>,
    /// Inverted ranks for desired metrics: `e_plus[generator][metric]`.
    pub e_plus: Vec<Vec<u32>>,
    /// Inverted ranks for undesired metrics: `e_minus[generator][metric]`.
    pub e_minus: Vec<Vec<u32>>,
}

impl TransformedMatrices {
    /// Inverted rank of `generator` on a desired `metric`, if present.
    pub fn plus(&self, generator: &str, metric: &str) -> Option<u32> {
        let gi = self.generators.iter().position(|g| g == generator)?;
        let mi = self.desired_metrics.iter().position(|m| m == metric)?;
        Some(self.e_plus[gi][mi])
    }

    /// Inverted rank of `generator` on an undesired `metric`, if present.
    pub fn minus(&self, generator: &str, metric: &str) -> Option<u32> {
        let gi = self.generators.iter().position(|g| g == generator)?;
        let mi = self.undesired_metrics.iter().position(|m| m == metric)?;
        Some(self.e_minus[gi][mi])
    }
}
