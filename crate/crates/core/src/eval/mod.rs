//! Splitting, threshold sweeps, comparisons, synthetic data and memory measurement.

pub mod compare;
pub mod memory;
pub mod report;
pub mod split;
pub mod synth;

pub use compare::{compare_runs, run_baseline, run_iterative, Approach, Comparison, RunRecord};
pub use memory::{measure_peak_memory, tracking_allocator_installed, PeakAlloc};
pub use report::{
    accuracy_table, comparison_table, evaluate, threshold_table, ComparisonRow, EvaluationReport, ThresholdRow,
    DEFAULT_THRESHOLDS,
};
pub use split::{split, stratified_subsample, Split, SplitSpec};
pub use synth::{generate_synthetic, shape_keyword_rank, KeywordSpec, PlantedRule, SyntheticCorpus, SyntheticSpec};
