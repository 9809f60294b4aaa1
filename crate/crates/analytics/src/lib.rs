//! Rank-correlation measures and baseline scorers.
//!
//! The correlation side compares two rankings of the same generators:
//! Kendall's tau (both the plain `(C − D) / (n(n−1)/2)` form and the
//! tie-adjusted variant) and Spearman's rho applied directly to the given
//! rank numbers. The baseline side offers two simpler scoring methods used
//! as comparison points for the main ranking pipeline: a weighted min-max
//! normalized average and a weighted per-metric rank average.

mod baseline;
mod correlation;
mod error;
mod vector;

pub use baseline::{baseline_weighted_normalized_average, baseline_weighted_rank_derived};
pub use correlation::{kendall_tau, kendall_tau_b, spearman_rho};
pub use error::AnalyticsError;
pub use vector::RankVector;
