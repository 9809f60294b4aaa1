//! Labeled rank vectors.

use serde::{Deserialize, Serialize};

use crate::error::AnalyticsError;

/// An ordered list of generator labels with their ranks (ties permitted).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankVector {
    /// Generator identifiers.
    pub labels: Vec<String>,
    /// Rank per label, aligned by index; every rank ≥ 1.
    pub ranks: Vec<u32>,
}

impl RankVector {
    /// Build a vector, checking alignment, rank positivity, and label
    /// uniqueness.
    pub fn new(labels: Vec<String>, ranks: Vec<u32>) -> Result<Self, AnalyticsError> {
        if labels.len() != ranks.len() {
            return Err(AnalyticsError::MalformedVector(format!(
                "{} labels but {} ranks",
                labels.len(),
                ranks.len()
            )));
        }
        if let Some(pos) = ranks.iter().position(|r| *r == 0) {
            return Err(AnalyticsError::MalformedVector(format!(
                "rank for `{}` is 0; ranks start at 1",
                labels[pos]
            )));
        }
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(AnalyticsError::MalformedVector(format!(
                    "duplicate label `{label}`"
                )));
            }
        }
        Ok(RankVector { labels, ranks })
    }

    /// Number of ranked items.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// True when the vector ranks nothing.
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Rank of `label`, if present.
    pub fn rank_of(&self, label: &str) -> Option<u32> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.ranks[i])
    }

    /// Pair up this vector's ranks with `other`'s, aligned by label.
    ///
    /// Errors unless both vectors rank exactly the same label set.
    pub fn aligned_with(&self, other: &RankVector) -> Result<Vec<(u32, u32)>, AnalyticsError> {
        if self.len() != other.len() {
            return Err(AnalyticsError::MismatchedLabels(format!(
                "{} items vs {}",
                self.len(),
                other.len()
            )));
        }
        self.labels
            .iter()
            .zip(&self.ranks)
            .map(|(label, &mine)| match other.rank_of(label) {
                Some(theirs) => Ok((mine, theirs)),
                None => Err(AnalyticsError::MismatchedLabels(format!(
                    "`{label}` missing from one vector"
                ))),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_length_mismatch() {
        assert!(RankVector::new(vec!["a".into()], vec![1, 2]).is_err());
    }

    #[test]
    fn rejects_zero_rank() {
        assert!(RankVector::new(vec!["a".into()], vec![0]).is_err());
    }

    #[test]
    fn rejects_duplicate_label() {
        assert!(RankVector::new(vec!["a".into(), "a".into()], vec![1, 2]).is_err());
    }

    #[test]
    fn aligns_by_label_not_position() {
        let a = RankVector::new(vec!["x".into(), "y".into()], vec![1, 2]).unwrap();
        let b = RankVector::new(vec!["y".into(), "x".into()], vec![5, 9]).unwrap();
        assert_eq!(a.aligned_with(&b).unwrap(), vec![(1, 9), (2, 5)]);
    }

    #[test]
    fn alignment_rejects_different_label_sets() {
        let a = RankVector::new(vec!["x".into()], vec![1]).unwrap();
        let b = RankVector::new(vec!["z".into()], vec![1]).unwrap();
        assert!(a.aligned_with(&b).is_err());
    }
}
