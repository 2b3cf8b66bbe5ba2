//! RIPPER-style grow/prune with description-length stopping.
//!
//! Growth reuses the FOIL-gain search on a grow partition. Pruning keeps the condition prefix
//! maximizing `(p - n) / (p + n)` on the prune partition. Rule sets stop growing when the total
//! description length (rule bits plus exception bits) exceeds the best seen so far by
//! `mdl_slack_bits`. The global optimization passes of the original algorithm are not run.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{LabelId, View};
use crate::error::{Error, Result};
use crate::rule::Condition;

use super::candidates::condition_universe;
use super::foil::grow;
use super::LearnerOptions;

/// Stratified grow / prune partition of positive and negative rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowPruneSplit {
    pub grow_pos: Vec<u32>,
    pub grow_neg: Vec<u32>,
    pub prune_pos: Vec<u32>,
    pub prune_neg: Vec<u32>,
}

pub fn split_grow_prune(pos: &[u32], neg: &[u32], grow_fraction: f64, seed: u64) -> GrowPruneSplit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cut = |rows: &[u32]| {
        let mut rows = rows.to_vec();
        rows.shuffle(&mut rng);
        let k = ((rows.len() as f64 * grow_fraction).ceil() as usize).min(rows.len());
        let prune = rows.split_off(k);
        (rows, prune)
    };
    let (grow_pos, prune_pos) = cut(pos);
    let (grow_neg, prune_neg) = cut(neg);
    GrowPruneSplit { grow_pos, grow_neg, prune_pos, prune_neg }
}

/// `(p - n) / (p + n)`, or `None` when nothing is covered.
pub fn prune_value(p: usize, n: usize) -> Option<f64> {
    (p + n > 0).then(|| (p as f64 - n as f64) / (p + n) as f64)
}

/// Keeps the prefix (length >= 1) with the highest prune value; ties favor the shorter
/// prefix. When no prefix covers any prune row the rule is returned unchanged.
pub fn prune(conditions: &[Condition], view: &View<'_>, prune_pos: &[u32], prune_neg: &[u32]) -> Vec<Condition> {
    let limit = view.feature_space();
    let mut pos = prune_pos.to_vec();
    let mut neg = prune_neg.to_vec();
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in conditions.iter().enumerate() {
        pos.retain(|&r| c.holds(view.example(r), limit));
        neg.retain(|&r| c.holds(view.example(r), limit));
        if let Some(v) = prune_value(pos.len(), neg.len()) {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i + 1, v));
            }
        }
    }
    match best {
        Some((len, _)) => conditions[..len].to_vec(),
        None => conditions.to_vec(),
    }
}

fn log2(x: f64) -> f64 {
    x.log2()
}

/// Bits to identify `k` elements out of `t` when each is picked with probability `p`.
pub fn subset_dl(t: f64, k: f64, p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    let mut bits = 0.0;
    if k > 0.0 && p > 0.0 {
        bits -= k * log2(p);
    }
    if t - k > 0.0 && p < 1.0 {
        bits -= (t - k) * log2(1.0 - p);
    }
    bits
}

/// Bits to encode one rule with `k` conditions drawn from a universe of `universe` conditions.
/// Weighted by one half, as redundant conditions are common.
pub fn theory_dl(k: usize, universe: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let k = k as f64;
    let mut bits = log2(k);
    if k > 1.0 {
        bits += 2.0 * log2(bits);
    }
    bits += subset_dl(universe, k, k / universe.max(k));
    0.5 * bits
}

/// Bits to encode the exceptions of a rule set covering `cover` examples (with `fp` false
/// positives) and leaving `uncover` examples (with `fn_` false negatives).
pub fn data_dl(exp_fp_over_err: f64, cover: f64, uncover: f64, fp: f64, fn_: f64) -> f64 {
    let total_bits = log2(cover + uncover + 1.0);
    let (cover_bits, uncover_bits);
    if cover > uncover {
        let exp_err = exp_fp_over_err * (fp + fn_);
        cover_bits = subset_dl(cover, fp, exp_err / cover);
        uncover_bits = if uncover > 0.0 { subset_dl(uncover, fn_, fn_ / uncover) } else { 0.0 };
    } else {
        let exp_err = (1.0 - exp_fp_over_err) * (fp + fn_);
        cover_bits = if cover > 0.0 { subset_dl(cover, fp, fp / cover) } else { 0.0 };
        uncover_bits = subset_dl(uncover, fn_, exp_err / uncover.max(1.0));
    }
    total_bits + cover_bits + uncover_bits
}

/// Per-rule record of the covering loop.
#[derive(Debug, Clone, PartialEq)]
pub struct RipperStep {
    pub split: GrowPruneSplit,
    pub grown: Vec<Condition>,
    pub pruned: Vec<Condition>,
    pub description_length: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RipperOutcome {
    pub rules: Vec<Vec<Condition>>,
    pub default_dl: f64,
    pub steps: Vec<RipperStep>,
}

/// One rule: grow on a stratified `grow_fraction` share, prune on the rest.
pub fn learn_one(
    view: &View<'_>,
    pos: &[u32],
    neg: &[u32],
    opts: &LearnerOptions,
    seed: u64,
    label: &str,
) -> Result<(Vec<Condition>, Vec<Condition>)> {
    let split = split_grow_prune(pos, neg, opts.grow_fraction, seed);
    let grown = grow(view, &split.grow_pos, &split.grow_neg, opts.max_conditions, opts.execution, label)?;
    let pruned = prune(&grown.conditions, view, &split.prune_pos, &split.prune_neg);
    Ok((grown.conditions, pruned))
}

/// Sequential covering for `target`: grow + prune one rule at a time, removing the positives
/// it covers, until the description length overshoots, positives run out, a rule errs on at
/// least half of its prune coverage, or `max_rules_per_label` rules exist.
pub fn learn_ruleset(view: &View<'_>, target: LabelId, opts: &LearnerOptions) -> Result<RipperOutcome> {
    let label = view.dataset().label_name(target).to_string();
    let limit = view.feature_space();
    let (all_pos, all_neg) = view.partition_by_label(target);
    let n_total = view.len() as f64;
    let universe = condition_universe(view).max(1.0);
    let exp_fp_over_err = if n_total > 0.0 { all_pos.len() as f64 / n_total } else { 0.0 };
    let default_dl = data_dl(exp_fp_over_err, 0.0, n_total, 0.0, all_pos.len() as f64);

    let mut min_dl = default_dl;
    let mut theory_bits = 0.0;
    let mut covered = vec![false; view.dataset().len()];
    let mut remaining = all_pos.clone();
    let mut rules = Vec::new();
    let mut steps = Vec::new();

    while rules.len() < opts.max_rules_per_label && !remaining.is_empty() {
        let seed = opts.seed ^ (rules.len() as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ u64::from(target);
        let split = split_grow_prune(&remaining, &all_neg, opts.grow_fraction, seed);
        let grown = match grow(view, &split.grow_pos, &split.grow_neg, opts.max_conditions, opts.execution, &label) {
            Ok(g) => g.conditions,
            Err(Error::NoRuleFound { .. }) => break,
            Err(e) => return Err(e),
        };
        let pruned = prune(&grown, view, &split.prune_pos, &split.prune_neg);

        let holds = |r: u32| pruned.iter().all(|c| c.holds(view.example(r), limit));
        let pp = split.prune_pos.iter().filter(|&&r| holds(r)).count();
        let pn = split.prune_neg.iter().filter(|&&r| holds(r)).count();
        let too_noisy = pp + pn > 0 && pn * 2 >= pp + pn;

        let mut next_covered = covered.clone();
        for &r in view.rows() {
            if holds(r) {
                next_covered[r as usize] = true;
            }
        }
        let cover = view.rows().iter().filter(|&&r| next_covered[r as usize]).count() as f64;
        let fp = all_neg.iter().filter(|&&r| next_covered[r as usize]).count() as f64;
        let fn_ = all_pos.iter().filter(|&&r| !next_covered[r as usize]).count() as f64;
        let dl =
            theory_bits + theory_dl(pruned.len(), universe) + data_dl(exp_fp_over_err, cover, n_total - cover, fp, fn_);

        let accepted = !too_noisy && dl <= min_dl + opts.mdl_slack_bits;
        steps.push(RipperStep {
            split: split.clone(),
            grown,
            pruned: pruned.clone(),
            description_length: dl,
            accepted,
        });
        if !accepted {
            break;
        }
        theory_bits += theory_dl(pruned.len(), universe);
        min_dl = min_dl.min(dl);
        covered = next_covered;
        remaining.retain(|&r| !holds(r));
        rules.push(pruned);
    }
    Ok(RipperOutcome { rules, default_dl, steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_dl_edges() {
        assert_eq!(subset_dl(10.0, 0.0, 0.0), 0.0);
        assert_eq!(subset_dl(10.0, 10.0, 1.0), 0.0);
        assert!((subset_dl(4.0, 2.0, 0.5) - 4.0).abs() < 1e-12);
        assert!(subset_dl(10.0, 3.0, 1.7).is_finite());
    }

    #[test]
    fn theory_dl_grows_with_conditions() {
        let u = 2000.0;
        assert!(theory_dl(1, u) < theory_dl(2, u));
        assert!(theory_dl(2, u) < theory_dl(5, u));
        assert_eq!(theory_dl(0, u), 0.0);
    }

    #[test]
    fn data_dl_prefers_fewer_errors() {
        let perfect = data_dl(0.5, 50.0, 50.0, 0.0, 0.0);
        let noisy = data_dl(0.5, 50.0, 50.0, 10.0, 10.0);
        assert!(perfect < noisy);
        assert!(data_dl(0.3, 0.0, 100.0, 0.0, 30.0).is_finite());
    }

    #[test]
    fn split_is_stratified_and_seeded() {
        let pos: Vec<u32> = (0..30).collect();
        let neg: Vec<u32> = (100..160).collect();
        let a = split_grow_prune(&pos, &neg, 2.0 / 3.0, 7);
        assert_eq!((a.grow_pos.len(), a.prune_pos.len()), (20, 10));
        assert_eq!((a.grow_neg.len(), a.prune_neg.len()), (40, 20));
        assert_eq!(a, split_grow_prune(&pos, &neg, 2.0 / 3.0, 7));
    }

    #[test]
    fn prune_value_cases() {
        assert_eq!(prune_value(0, 0), None);
        assert_eq!(prune_value(4, 1), Some(0.6));
    }
}
