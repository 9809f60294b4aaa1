//! Pure, deterministic ranking of synthetic data generators for a purpose.
//!
//! A *purpose* weights a set of evaluation metrics (split into desired and
//! undesired properties) and the quality-indicator categories those metrics
//! belong to. Given a matrix of raw metric scores per generator, the pipeline
//!
//! 1. turns every relevant metric column into *inverted competition ranks*
//!    oriented so that higher is better ([`transform`]),
//! 2. folds the inverted ranks into weighted desired/undesired scores and an
//!    overall score per generator ([`rank_generators`]), and
//! 3. assigns final competition ranks over the overall scores.
//!
//! All operations are pure functions of their inputs; results are bit-stable
//! across runs and safe for concurrent use.

mod classification;
mod error;
mod matrix;
mod rank;
mod spec;

pub use classification::MetricClassification;
pub use error::RankingError;
pub use matrix::{EvaluationMatrix, TransformedMatrices};
pub use rank::{
    competition_ranks, rank_all_purposes, rank_generators, transform, RankEntry, RankingResult,
};
pub use spec::{validate_purpose_spec, PurposeSpec, QualityIndicator, ValidationReport};

/// Absolute tolerance used for tie detection between scores and for
/// weight-sum validation. Inputs are short decimal fractions, so this absorbs
/// decimal-to-binary noise without merging genuinely distinct values.
pub const TOLERANCE: f64 = 1e-9;
