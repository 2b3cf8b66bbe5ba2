//! Threshold sweeps and report tables.

use std::fmt::Write as _;
use std::time::Duration;

use serde::Serialize;

use crate::dataset::View;
use crate::error::Result;
use crate::exec::Execution;
use crate::rule::RuleSet;

/// Threshold columns of the default sweep.
pub const DEFAULT_THRESHOLDS: [f64; 5] = [0.0, 0.6, 0.7, 0.8, 0.9];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub threshold: f64,
    pub predicted: usize,
    pub correct: usize,
    /// `correct / predicted`, 0 when nothing was predicted.
    pub precision: f64,
    pub abstained: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub rows: Vec<ThresholdRow>,
    pub total: usize,
    /// Correct predictions over all examples using every rule; abstentions count as errors.
    pub accuracy: f64,
    pub peak_memory_bytes: Option<u64>,
    #[serde(serialize_with = "secs")]
    pub wall_time: Option<Duration>,
}

fn secs<S: serde::Serializer>(d: &Option<Duration>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match d {
        Some(d) => s.serialize_some(&d.as_secs_f64()),
        None => s.serialize_none(),
    }
}

impl EvaluationReport {
    pub fn row(&self, threshold: f64) -> Option<&ThresholdRow> {
        self.rows.iter().find(|r| r.threshold == threshold)
    }
}

/// Runs full-match prediction at every threshold over `test`.
pub fn evaluate(ruleset: &RuleSet, test: &View<'_>, thresholds: &[f64], exec: Execution) -> Result<EvaluationReport> {
    ruleset.check_schema(test.dataset())?;
    let data = test.dataset();
    let mut sweep: Vec<f64> = thresholds.to_vec();
    sweep.push(f64::NEG_INFINITY);
    // Per example: one "correct?" flag per threshold, None for abstention.
    let outcomes: Vec<Result<Vec<Option<bool>>>> = exec.map(test.rows(), |&r| {
        let ex = test.example(r);
        let truth = data.label_name(ex.label);
        sweep.iter().map(|&t| Ok(ruleset.predict(ex, t)?.map(|p| p == truth))).collect()
    });
    let mut predicted = vec![0usize; sweep.len()];
    let mut correct = vec![0usize; sweep.len()];
    for o in outcomes {
        for (i, v) in o?.into_iter().enumerate() {
            if let Some(ok) = v {
                predicted[i] += 1;
                correct[i] += usize::from(ok);
            }
        }
    }
    let total = test.len();
    let rows = thresholds
        .iter()
        .enumerate()
        .map(|(i, &threshold)| ThresholdRow {
            threshold,
            predicted: predicted[i],
            correct: correct[i],
            precision: if predicted[i] == 0 { 0.0 } else { correct[i] as f64 / predicted[i] as f64 },
            abstained: total - predicted[i],
        })
        .collect();
    let all = sweep.len() - 1;
    Ok(EvaluationReport {
        rows,
        total,
        accuracy: if total == 0 { 0.0 } else { correct[all] as f64 / total as f64 },
        peak_memory_bytes: None,
        wall_time: None,
    })
}

fn pct(x: f64) -> String {
    format!("{:.2}%", 100.0 * x)
}

/// Predicted / correct / precision rows with one column per threshold.
pub fn threshold_table(title: &str, report: &EvaluationReport) -> String {
    let mut header = vec![title.to_string()];
    header.extend(report.rows.iter().map(|r| format!("t={}", r.threshold)));
    let lines = vec![
        header,
        std::iter::once("predicted".to_string()).chain(report.rows.iter().map(|r| r.predicted.to_string())).collect(),
        std::iter::once("correct".to_string()).chain(report.rows.iter().map(|r| r.correct.to_string())).collect(),
        std::iter::once("precision".to_string()).chain(report.rows.iter().map(|r| pct(r.precision))).collect(),
    ];
    align(&lines)
}

/// One line of a comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub data: String,
    pub learner: String,
    pub peak_memory_bytes: Option<u64>,
    pub accuracy: f64,
}

pub fn comparison_table(rows: &[ComparisonRow]) -> String {
    let mut lines =
        vec![vec!["Data".to_string(), "Learner".to_string(), "Peak memory (MiB)".to_string(), "Accuracy".to_string()]];
    for r in rows {
        lines.push(vec![
            r.data.clone(),
            r.learner.clone(),
            r.peak_memory_bytes.map_or_else(|| "n/a".to_string(), |b| format!("{:.2}", b as f64 / (1024.0 * 1024.0))),
            pct(r.accuracy),
        ]);
    }
    align(&lines)
}

/// The comparison table without the memory column, for reports that must be reproducible.
pub fn accuracy_table(rows: &[ComparisonRow]) -> String {
    let mut lines = vec![vec!["Data".to_string(), "Learner".to_string(), "Accuracy".to_string()]];
    for r in rows {
        lines.push(vec![r.data.clone(), r.learner.clone(), pct(r.accuracy)]);
    }
    align(&lines)
}

/// Left-aligns the first column and right-aligns the rest.
fn align(lines: &[Vec<String>]) -> String {
    let cols = lines.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| lines.iter().filter_map(|l| l.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, line) in lines.iter().enumerate() {
        for (c, cell) in line.iter().enumerate() {
            if c == 0 {
                let _ = write!(out, "{cell:<w$}", w = widths[0]);
            } else {
                let _ = write!(out, " | {cell:>w$}", w = widths[c]);
            }
        }
        out.push('\n');
        if i == 0 {
            let total: usize = widths.iter().sum::<usize>() + 3 * cols.saturating_sub(1);
            out.push_str(&"-".repeat(total));
            out.push('\n');
        }
    }
    out
}
