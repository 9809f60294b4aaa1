//! The embedded evaluation corpus: eight generators, eight metrics, and the
//! purpose configurations of the published study.
//!
//! The corpus is compiled into the binary and integrity-pinned: `load_corpus`
//! refuses to run if the embedded bytes hash to anything but the recorded
//! digest, so a silently edited copy can never masquerade as the published
//! data. Every scenario report embeds the digest for provenance.

use std::collections::{BTreeMap, BTreeSet};

use ledger_state::sha512_hex;
use ranking_core::{
    EvaluationMatrix, MetricClassification, PurposeSpec, QualityIndicator,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::ExperimentError;

/// Raw bytes of the corpus document, compiled in.
pub const CORPUS_JSON: &str = include_str!("../corpus/breast_small_seer.json");

/// SHA-512 of [`CORPUS_JSON`]; `load_corpus` enforces it.
pub const CORPUS_DIGEST: &str = "23d830ac43310c2d52f301393617a3eabda0b53c515f977bb6e444797662ec72dc84a78d16f963534e7d9cfcdc9c77ccc72a139d28b60e34c35d86420433ff1c";

/// One generator's measured metric values, in input-file shape.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorRow {
    pub name: String,
    pub metrics: BTreeMap<String, f64>,
}

/// The measurement file: the roster in registration order with one row each.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputsFile {
    pub generators: Vec<GeneratorRow>,
}

/// One family of purposes registered together: category weights plus the
/// desired/undesired metric weights. Purposes missing from a side leave that
/// side empty.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct PurposeGroup {
    pub cw: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default)]
    pub wmp: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default)]
    pub wmm: BTreeMap<String, BTreeMap<String, f64>>,
}

impl PurposeGroup {
    /// Purpose names, sorted.
    pub fn purposes(&self) -> Vec<String> {
        self.cw.keys().cloned().collect()
    }
}

/// The full corpus document.
#[derive(Debug, Clone, Deserialize)]
pub struct Corpus {
    pub name: String,
    pub description: String,
    pub generators: Vec<String>,
    pub metrics: Vec<String>,
    pub qi: BTreeMap<String, BTreeMap<String, MetricClassification>>,
    pub inputs: InputsFile,
    pub ground_truth: BTreeMap<String, BTreeMap<String, u32>>,
    pub groups: BTreeMap<String, PurposeGroup>,
}

/// Parses and validates the embedded corpus after checking its digest.
pub fn load_corpus() -> Result<Corpus, ExperimentError> {
    let digest = sha512_hex(CORPUS_JSON.as_bytes());
    if digest != CORPUS_DIGEST {
        return Err(ExperimentError::Corpus(format!(
            "corpus digest mismatch: expected {CORPUS_DIGEST}, found {digest}"
        )));
    }
    let corpus: Corpus = serde_json::from_str(CORPUS_JSON)
        .map_err(|e| ExperimentError::Corpus(format!("unparseable corpus: {e}")))?;
    corpus.validate()?;
    Ok(corpus)
}

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

impl Corpus {
    fn validate(&self) -> Result<(), ExperimentError> {
        let fail = |detail: String| Err(ExperimentError::Corpus(detail));
        let metric_set: BTreeSet<&String> = self.metrics.iter().collect();
        if self.generators.len() != 8 || metric_set.len() != 8 {
            return fail(format!(
                "expected 8 generators and 8 distinct metrics, found {} and {}",
                self.generators.len(),
                metric_set.len()
            ));
        }
        let row_names: Vec<&String> = self.inputs.generators.iter().map(|r| &r.name).collect();
        if row_names != self.generators.iter().collect::<Vec<_>>() {
            return fail("measurement rows do not match the roster order".into());
        }
        for row in &self.inputs.generators {
            if row.metrics.keys().collect::<BTreeSet<_>>() != metric_set {
                return fail(format!("row {} does not cover every metric", row.name));
            }
        }
        let mut covered = BTreeSet::new();
        for (indicator, metrics) in &self.qi {
            for metric in metrics.keys() {
                if !metric_set.contains(metric) {
                    return fail(format!("indicator {indicator} names unknown metric {metric}"));
                }
                if !covered.insert(metric) {
                    return fail(format!("metric {metric} assigned to two indicators"));
                }
            }
        }
        if covered.len() != self.metrics.len() {
            return fail("indicators do not cover every metric".into());
        }
        for (group_name, group) in &self.groups {
            self.validate_group(group_name, group)?;
        }
        for (purpose, ranks) in &self.ground_truth {
            if ranks.keys().collect::<BTreeSet<_>>()
                != self.generators.iter().collect::<BTreeSet<_>>()
            {
                return fail(format!("ground truth for {purpose} does not cover the roster"));
            }
            if ranks.values().any(|r| !(1..=8).contains(r)) {
                return fail(format!("ground truth for {purpose} has a rank outside 1..=8"));
            }
        }
        Ok(())
    }

    fn validate_group(&self, group_name: &str, group: &PurposeGroup) -> Result<(), ExperimentError> {
        let fail = |detail: String| Err(ExperimentError::Corpus(detail));
        let sums_to_one = |weights: &BTreeMap<String, f64>| {
            weights.is_empty() || (weights.values().sum::<f64>() - 1.0).abs() <= WEIGHT_SUM_TOLERANCE
        };
        for (side_name, side) in [("wmp", &group.wmp), ("wmm", &group.wmm)] {
            for (purpose, weights) in side {
                if !group.cw.contains_key(purpose) {
                    return fail(format!(
                        "group {group_name}: {side_name} names {purpose} but cw does not"
                    ));
                }
                if let Some(unknown) = weights.keys().find(|m| !self.metrics.contains(m)) {
                    return fail(format!(
                        "group {group_name}: {side_name}[{purpose}] names unknown metric {unknown}"
                    ));
                }
                if !sums_to_one(weights) {
                    return fail(format!(
                        "group {group_name}: {side_name}[{purpose}] weights do not sum to 1"
                    ));
                }
            }
        }
        for (purpose, weights) in &group.cw {
            if let Some(unknown) = weights.keys().find(|q| !self.qi.contains_key(*q)) {
                return fail(format!(
                    "group {group_name}: cw[{purpose}] names unknown indicator {unknown}"
                ));
            }
            if !sums_to_one(weights) {
                return fail(format!(
                    "group {group_name}: cw[{purpose}] weights do not sum to 1"
                ));
            }
            let desired: BTreeSet<&String> = group.wmp.get(purpose).into_iter().flatten().map(|(m, _)| m).collect();
            let undesired: BTreeSet<&String> = group.wmm.get(purpose).into_iter().flatten().map(|(m, _)| m).collect();
            if let Some(both) = desired.intersection(&undesired).next() {
                return fail(format!(
                    "group {group_name}: {purpose} lists {both} as both desired and undesired"
                ));
            }
        }
        Ok(())
    }

    /// The named purpose group.
    pub fn group(&self, name: &str) -> Result<&PurposeGroup, ExperimentError> {
        self.groups
            .get(name)
            .ok_or_else(|| ExperimentError::Corpus(format!("no purpose group named {name}")))
    }

    /// The indicator registration document, input-file shape.
    pub fn qi_file(&self) -> Value {
        serde_json::to_value(&self.qi).expect("classifications are plain JSON")
    }

    /// The measurement registration document, input-file shape.
    pub fn inputs_file(&self) -> Value {
        serde_json::to_value(&self.inputs).expect("measurement rows are plain JSON")
    }

    /// Metric → classification, flattened across indicators.
    pub fn classifications(&self) -> BTreeMap<String, MetricClassification> {
        self.qi
            .values()
            .flat_map(|metrics| metrics.iter().map(|(m, c)| (m.clone(), *c)))
            .collect()
    }

    /// The indicator partition as ranking-core sees it.
    pub fn quality_indicators(&self) -> Vec<QualityIndicator> {
        self.qi
            .iter()
            .map(|(name, metrics)| QualityIndicator {
                name: name.clone(),
                metrics: metrics.keys().cloned().collect(),
            })
            .collect()
    }

    /// The measurement rows as a ranking-core matrix, roster order preserved.
    pub fn eval_matrix(&self) -> Result<EvaluationMatrix, ExperimentError> {
        let rows = self
            .inputs
            .generators
            .iter()
            .map(|row| {
                self.metrics
                    .iter()
                    .map(|m| row.metrics[m])
                    .collect::<Vec<f64>>()
            })
            .collect();
        Ok(EvaluationMatrix::new(
            self.generators.clone(),
            self.metrics.clone(),
            rows,
        )?)
    }

    /// Full purpose specs for one group, purposes sorted.
    pub fn purpose_specs(&self, group: &PurposeGroup) -> Vec<PurposeSpec> {
        group
            .cw
            .iter()
            .map(|(purpose, qi_weights)| PurposeSpec {
                purpose: purpose.clone(),
                qi_weights: qi_weights.clone(),
                desired_weights: group.wmp.get(purpose).cloned().unwrap_or_default(),
                undesired_weights: group.wmm.get(purpose).cloned().unwrap_or_default(),
                classifications: self.classifications(),
                quality_indicators: self.quality_indicators(),
            })
            .collect()
    }

    /// Ground-truth ranks for `purpose` in roster order.
    pub fn ground_truth_ranks(&self, purpose: &str) -> Result<Vec<u32>, ExperimentError> {
        let ranks = self.ground_truth.get(purpose).ok_or_else(|| {
            ExperimentError::Corpus(format!("no ground truth for purpose {purpose}"))
        })?;
        Ok(self.generators.iter().map(|g| ranks[g]).collect())
    }
}
