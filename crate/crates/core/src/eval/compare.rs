//! Baseline versus iterative runs on one dataset.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::Result;
use crate::iterative::{learn_multiclass, IterationConfig, IterationTrace};
use crate::learn::{learn_baseline, LearnerOptions};
use crate::rule::RuleSet;

use super::memory::measure_peak_memory;
use super::report::{evaluate, EvaluationReport};
use super::split::{split, Split, SplitSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Approach {
    Baseline,
    Iterative,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub approach: Approach,
    pub ruleset: RuleSet,
    pub traces: Vec<IterationTrace>,
    /// Test-set evaluation; its memory and time fields describe the learning phase.
    pub report: EvaluationReport,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub split: Split,
    pub baseline: RunRecord,
    pub iterative: RunRecord,
}

/// Learns with the plain learner on all non-test rows at the full feature space.
pub fn run_baseline(data: &Dataset, split: &Split, learner: &LearnerOptions, thresholds: &[f64]) -> Result<RunRecord> {
    let train = data.select(split.train_and_valid());
    let start = Instant::now();
    let (ruleset, peak) = measure_peak_memory(|| learn_baseline(learner, &train));
    let elapsed = start.elapsed();
    finish(data, split, Approach::Baseline, ruleset?, Vec::new(), peak, elapsed, thresholds, learner)
}

/// Learns with the confidence-gated iterative wrapper on the training rows, scoring rules on
/// the validation rows.
pub fn run_iterative(
    data: &Dataset,
    split: &Split,
    config: &IterationConfig,
    learner: &LearnerOptions,
    thresholds: &[f64],
) -> Result<RunRecord> {
    let start = Instant::now();
    let (out, peak) = measure_peak_memory(|| learn_multiclass(data, &split.train, &split.valid, config, learner));
    let elapsed = start.elapsed();
    let (ruleset, traces) = out?;
    finish(data, split, Approach::Iterative, ruleset, traces, peak, elapsed, thresholds, learner)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    data: &Dataset,
    split: &Split,
    approach: Approach,
    ruleset: RuleSet,
    traces: Vec<IterationTrace>,
    peak: Option<u64>,
    elapsed: Duration,
    thresholds: &[f64],
    learner: &LearnerOptions,
) -> Result<RunRecord> {
    let test = data.select(split.test.clone());
    let mut report = evaluate(&ruleset, &test, thresholds, learner.execution)?;
    report.peak_memory_bytes = peak;
    report.wall_time = Some(elapsed);
    Ok(RunRecord { approach, ruleset, traces, report })
}

/// Splits `data`, then runs the baseline and the iterative approach one after the other.
pub fn compare_runs(
    data: &Dataset,
    split_spec: &SplitSpec,
    config: &IterationConfig,
    learner: &LearnerOptions,
    thresholds: &[f64],
) -> Result<Comparison> {
    let split = split(data, split_spec)?;
    let baseline = run_baseline(data, &split, learner, thresholds)?;
    let iterative = run_iterative(data, &split, config, learner, thresholds)?;
    Ok(Comparison { split, baseline, iterative })
}
