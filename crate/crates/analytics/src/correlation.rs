//! Kendall's tau and Spearman's rho over labeled rank vectors.

use crate::error::AnalyticsError;
use crate::vector::RankVector;

fn concordance(pairs: &[(u32, u32)]) -> (i64, i64) {
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    for i in 0..pairs.len() {
        for j in (i + 1)..pairs.len() {
            let dx = i64::from(pairs[i].0) - i64::from(pairs[j].0);
            let dy = i64::from(pairs[i].1) - i64::from(pairs[j].1);
            let sign = dx * dy;
            if sign > 0 {
                concordant += 1;
            } else if sign < 0 {
                discordant += 1;
            }
        }
    }
    (concordant, discordant)
}

/// Kendall's tau: `(concordant − discordant) / (n(n−1)/2)`.
///
/// Pairs tied in either vector count as neither concordant nor discordant
/// but stay in the denominator, so vectors with ties cannot reach ±1.
/// Vectors are aligned by label; the label sets must be identical.
pub fn kendall_tau(a: &RankVector, b: &RankVector) -> Result<f64, AnalyticsError> {
    let pairs = a.aligned_with(b)?;
    let n = pairs.len();
    if n < 2 {
        return Err(AnalyticsError::TooFewItems(n));
    }
    let (concordant, discordant) = concordance(&pairs);
    let total = (n * (n - 1) / 2) as f64;
    Ok((concordant - discordant) as f64 / total)
}

/// Tie-adjusted Kendall's tau:
/// `(C − D) / √((n₀ − n₁)(n₀ − n₂))` where `n₀ = n(n−1)/2` and `n₁`, `n₂`
/// count the tied pairs of each vector.
///
/// Unlike [`kendall_tau`], identical vectors evaluate to exactly 1 even when
/// they contain ties. Errors when every pair is tied in one vector.
pub fn kendall_tau_b(a: &RankVector, b: &RankVector) -> Result<f64, AnalyticsError> {
    let pairs = a.aligned_with(b)?;
    let n = pairs.len();
    if n < 2 {
        return Err(AnalyticsError::TooFewItems(n));
    }
    let (concordant, discordant) = concordance(&pairs);
    let tied_pairs = |side: fn(&(u32, u32)) -> u32| -> i64 {
        let mut count = 0i64;
        for i in 0..pairs.len() {
            for j in (i + 1)..pairs.len() {
                if side(&pairs[i]) == side(&pairs[j]) {
                    count += 1;
                }
            }
        }
        count
    };
    let n0 = (n * (n - 1) / 2) as i64;
    let n1 = tied_pairs(|p| p.0);
    let n2 = tied_pairs(|p| p.1);
    if n0 == n1 || n0 == n2 {
        return Err(AnalyticsError::AllTied);
    }
    let denominator = (((n0 - n1) as f64) * ((n0 - n2) as f64)).sqrt();
    Ok((concordant - discordant) as f64 / denominator)
}

/// Spearman's rho: `1 − 6·Σd² / (n(n²−1))`, applied directly to the given
/// rank numbers (no fractional re-ranking of ties).
///
/// Identical vectors evaluate to exactly 1.
pub fn spearman_rho(a: &RankVector, b: &RankVector) -> Result<f64, AnalyticsError> {
    let pairs = a.aligned_with(b)?;
    let n = pairs.len();
    if n < 2 {
        return Err(AnalyticsError::TooFewItems(n));
    }
    let d2: f64 = pairs
        .iter()
        .map(|(x, y)| {
            let d = f64::from(*x) - f64::from(*y);
            d * d
        })
        .sum();
    let nf = n as f64;
    Ok(1.0 - 6.0 * d2 / (nf * (nf * nf - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vector(ranks: &[u32]) -> RankVector {
        let labels = (0..ranks.len()).map(|i| format!("g{i}")).collect();
        RankVector::new(labels, ranks.to_vec()).unwrap()
    }

    #[test]
    fn tau_hand_case_with_one_swap() {
        // Pairs: 5 concordant, 1 discordant → 4/6.
        let tau = kendall_tau(&vector(&[1, 2, 3, 4]), &vector(&[1, 3, 2, 4])).unwrap();
        assert_eq!(tau, 0.6666666666666666);
    }

    #[test]
    fn tau_is_one_on_identical_tie_free_vectors() {
        let v = vector(&[2, 1, 4, 3]);
        assert_eq!(kendall_tau(&v, &v).unwrap(), 1.0);
    }

    #[test]
    fn tau_is_minus_one_on_tie_free_reversal() {
        let tau = kendall_tau(&vector(&[1, 2, 3, 4]), &vector(&[4, 3, 2, 1])).unwrap();
        assert_eq!(tau, -1.0);
    }

    #[test]
    fn tau_counts_tied_pairs_in_denominator() {
        // Identical vectors with a tie: 5 of 6 pairs concordant, 1 tied.
        let v = vector(&[1, 2, 2, 4]);
        assert_eq!(kendall_tau(&v, &v).unwrap(), 5.0 / 6.0);
    }

    #[test]
    fn tau_b_is_exactly_one_on_identical_tied_vectors() {
        let v = vector(&[7, 6, 1, 2, 8, 2, 5, 2]);
        assert_eq!(kendall_tau_b(&v, &v).unwrap(), 1.0);
    }

    #[test]
    fn tau_b_matches_tau_without_ties() {
        let a = vector(&[1, 2, 3, 4]);
        let b = vector(&[1, 3, 2, 4]);
        assert_eq!(
            kendall_tau(&a, &b).unwrap(),
            kendall_tau_b(&a, &b).unwrap()
        );
    }

    #[test]
    fn tau_b_rejects_fully_tied_vector() {
        let flat = vector(&[1, 1, 1]);
        let other = vector(&[1, 2, 3]);
        assert!(matches!(
            kendall_tau_b(&flat, &other),
            Err(AnalyticsError::AllTied)
        ));
    }

    #[test]
    fn rho_hand_case_reversal() {
        // Σd² = 8 → 1 − 48/24 = −1.
        let rho = spearman_rho(&vector(&[1, 2, 3]), &vector(&[3, 2, 1])).unwrap();
        assert_eq!(rho, -1.0);
    }

    #[test]
    fn rho_is_exactly_one_on_identical_vectors() {
        let v = vector(&[7, 6, 1, 2, 8, 2, 5, 2]);
        assert_eq!(spearman_rho(&v, &v).unwrap(), 1.0);
    }

    #[test]
    fn too_few_items_is_an_error() {
        let v = vector(&[1]);
        assert!(matches!(
            kendall_tau(&v, &v),
            Err(AnalyticsError::TooFewItems(1))
        ));
        assert!(matches!(
            spearman_rho(&v, &v),
            Err(AnalyticsError::TooFewItems(1))
        ));
    }

    #[test]
    fn mismatched_labels_is_an_error() {
        let a = RankVector::new(vec!["x".into(), "y".into()], vec![1, 2]).unwrap();
        let b = RankVector::new(vec!["x".into(), "z".into()], vec![1, 2]).unwrap();
        assert!(kendall_tau(&a, &b).is_err());
        assert!(spearman_rho(&a, &b).is_err());
    }

    #[test]
    fn alignment_is_by_label() {
        // Same ranking expressed with labels listed in different orders.
        let a = RankVector::new(vec!["x".into(), "y".into(), "z".into()], vec![1, 2, 3]).unwrap();
        let b = RankVector::new(vec!["z".into(), "x".into(), "y".into()], vec![3, 1, 2]).unwrap();
        assert_eq!(kendall_tau(&a, &b).unwrap(), 1.0);
        assert_eq!(spearman_rho(&a, &b).unwrap(), 1.0);
    }
}
