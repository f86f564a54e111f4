//! Correlation, significance testing and corpus analyses.

pub mod analysis;
pub mod correlation;
pub mod ranking;

pub use analysis::{
    bleu_subset_curve, ngram_coverage_analysis, subset_correlation_curve, CoverageTables, CurvePoint, NGramCount,
};
pub use correlation::{pearson, student_t_sf, williams_test, Tail, WilliamsResult};
pub use ranking::{
    bootstrap_tau_significance, da_to_relative_ranking, decision_flip_analysis, kendall_tau_rr, pair_outcomes,
    FlipAnalysis, JudgmentTable, RankedPair, RelativeRankingPairs, SegmentScores, TiePolicy, DEFAULT_MIN_GAP,
};
