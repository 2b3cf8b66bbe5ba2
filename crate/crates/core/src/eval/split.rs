use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    /// Share of the non-test rows held out for validation.
    pub validation_fraction_of_train: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { test_fraction: 0.2, validation_fraction_of_train: 0.15, seed: 0, stratified: true }
    }
}

/// Disjoint, exhaustive, ascending row sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Split {
    pub train: Vec<u32>,
    pub valid: Vec<u32>,
    pub test: Vec<u32>,
}

impl Split {
    /// Training plus validation rows, for learners that need no held-out set.
    pub fn train_and_valid(&self) -> Vec<u32> {
        let mut rows = [self.train.as_slice(), self.valid.as_slice()].concat();
        rows.sort_unstable();
        rows
    }
}

const MIN_PER_LABEL: usize = 10;

/// Seeded train / validation / test split, stratified by label unless disabled. Each group is
/// rounded independently, so proportions hold within one example per label.
pub fn split(data: &Dataset, spec: &SplitSpec) -> Result<Split> {
    for (name, f) in
        [("test_fraction", spec.test_fraction), ("validation_fraction_of_train", spec.validation_fraction_of_train)]
    {
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::InvalidConfig(format!("{name} must lie in (0, 1), got {f}")));
        }
    }
    let groups: Vec<Vec<u32>> = if spec.stratified {
        let mut groups = vec![Vec::new(); data.labels().len()];
        for (i, ex) in data.examples().iter().enumerate() {
            groups[ex.label as usize].push(i as u32);
        }
        for (label, g) in data.labels().iter().zip(&groups) {
            if g.len() < MIN_PER_LABEL {
                return Err(Error::InsufficientData(format!(
                    "label {label:?} has {} examples, stratified splitting needs {MIN_PER_LABEL}",
                    g.len()
                )));
            }
        }
        groups
    } else {
        if data.len() < MIN_PER_LABEL {
            return Err(Error::InsufficientData(format!("{} examples", data.len())));
        }
        vec![(0..data.len() as u32).collect()]
    };

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Split { train: Vec::new(), valid: Vec::new(), test: Vec::new() };
    for mut g in groups {
        g.shuffle(&mut rng);
        let n_test = (g.len() as f64 * spec.test_fraction).round() as usize;
        let rest = g.len() - n_test;
        let n_valid = (rest as f64 * spec.validation_fraction_of_train).round() as usize;
        out.test.extend_from_slice(&g[..n_test]);
        out.valid.extend_from_slice(&g[n_test..n_test + n_valid]);
        out.train.extend_from_slice(&g[n_test + n_valid..]);
    }
    out.train.sort_unstable();
    out.valid.sort_unstable();
    out.test.sort_unstable();
    Ok(out)
}

/// Seeded sample of `n` of the indices of `labels`, keeping label proportions; per-label quotas
/// use largest remainders.
pub fn stratified_subsample<L: Ord>(labels: &[L], n: usize, seed: u64) -> Result<Vec<u32>> {
    if n > labels.len() {
        return Err(Error::InsufficientData(format!("cannot sample {n} of {} examples", labels.len())));
    }
    let mut by_label: BTreeMap<&L, Vec<u32>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_label.entry(l).or_default().push(i as u32);
    }
    let groups: Vec<Vec<u32>> = by_label.into_values().collect();
    let exact: Vec<f64> = groups.iter().map(|g| g.len() as f64 * n as f64 / labels.len() as f64).collect();
    let mut quota: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let short = n - quota.iter().sum::<usize>();
    for &i in order.iter().take(short) {
        quota[i] += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for (mut g, q) in groups.into_iter().zip(quota) {
        g.shuffle(&mut rng);
        out.extend_from_slice(&g[..q]);
    }
    out.sort_unstable();
    Ok(out)
}
