//! Confidence-gated rule learning with dictionary expansion.
//!
//! Each rule is learned on a training pool restricted to a prefix of the vocabulary and scored
//! on validation data by its Value of Confidence (validation precision). A rule that does not
//! clear the threshold sends its validation false positives into the training pool, the
//! dictionary grows by `expansion_factor`, and the rule is relearned. After `max_iterations`
//! the last rule is kept as a fallback regardless of its confidence.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, LabelId, Mode, View};
use crate::error::{Error, Result};
use crate::learn::{learn_one_rule, LearnerOptions};
use crate::rule::{coverage, Coverage, Rule, RuleSet, ScoredRule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IterationConfig {
    pub max_iterations: usize,
    pub voc_threshold: f64,
    pub initial_dictionary_fraction: f64,
    pub expansion_factor: usize,
    /// Consecutive fallback rules after which a label stops producing rules.
    pub patience: usize,
    pub max_rules_per_label: usize,
    pub seed: u64,
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig {
            max_iterations: 5,
            voc_threshold: 0.9,
            initial_dictionary_fraction: 0.125,
            expansion_factor: 2,
            patience: 3,
            max_rules_per_label: 10,
            seed: 0,
        }
    }
}

impl IterationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.initial_dictionary_fraction > 0.0 && self.initial_dictionary_fraction <= 1.0) {
            return bad(format!(
                "initial_dictionary_fraction must lie in (0, 1], got {}",
                self.initial_dictionary_fraction
            ));
        }
        if self.expansion_factor < 2 {
            return bad("expansion_factor must be at least 2".into());
        }
        if !(0.0..=1.0).contains(&self.voc_threshold) {
            return bad(format!("voc_threshold must lie in [0, 1], got {}", self.voc_threshold));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1".into());
        }
        if self.patience == 0 {
            return bad("patience must be at least 1".into());
        }
        Ok(())
    }

    /// First dictionary size for a vocabulary of `v` features: `ceil(fraction * v)`.
    pub fn initial_dictionary_size(&self, v: usize) -> usize {
        ((self.initial_dictionary_fraction * v as f64).ceil() as usize).clamp(1, v.max(1))
    }

    /// The dictionary sizes a rule runs through if it is never accepted.
    pub fn dictionary_schedule(&self, v: usize) -> Vec<usize> {
        let mut k = self.initial_dictionary_size(v);
        let mut out = Vec::with_capacity(self.max_iterations);
        for _ in 0..self.max_iterations {
            out.push(k);
            k = k.saturating_mul(self.expansion_factor).min(v);
        }
        out
    }
}

/// Validation precision `p / (p + n)` of `rule` for `target`; 0 when the rule covers nothing.
pub fn value_of_confidence(rule: &Rule, validation: &View<'_>, target: LabelId) -> Result<f64> {
    Ok(voc_of(coverage(rule, validation, target)?))
}

pub(crate) fn voc_of(cov: Coverage) -> f64 {
    if cov.total() == 0 {
        0.0
    } else {
        cov.positives as f64 / cov.total() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Accepted,
    Expanded,
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    /// 1-based.
    pub iteration: usize,
    pub dictionary_size: Option<usize>,
    /// `None` when no condition separated the classes at this dictionary size.
    pub rule: Option<Rule>,
    pub validation: Coverage,
    pub voc: f64,
    pub decision: Decision,
    /// Validation false positives moved into the training pool after this iteration.
    pub injected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub label: String,
    /// Position of the rule among the label's rules, 0-based.
    pub rule_index: usize,
    pub records: Vec<IterationRecord>,
}

/// Row indices of the mutable training and validation pools of one label run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pools {
    pub train: Vec<u32>,
    pub valid: Vec<u32>,
}

fn mix_seed(seed: u64, target: LabelId, rule_index: usize, iteration: usize) -> u64 {
    let mut h = seed ^ 0x51_7cc1_b727_220a;
    for x in [u64::from(target), rule_index as u64, iteration as u64] {
        h = (h ^ x).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        h ^= h >> 29;
    }
    h
}

/// Learns one rule for `target`, expanding the dictionary until its confidence clears the
/// threshold or the iteration budget runs out. Validation false positives of each rejected
/// rule are moved from `pools.valid` into `pools.train`.
pub fn learn_confident_rule(
    data: &Dataset,
    pools: &mut Pools,
    target: LabelId,
    config: &IterationConfig,
    learner: &LearnerOptions,
    rule_index: usize,
) -> Result<(ScoredRule, IterationTrace)> {
    config.validate()?;
    if pools.valid.is_empty() {
        return Err(Error::InsufficientData("validation pool is empty".into()));
    }
    let v = data.schema().width();
    let text = data.mode() == Mode::Text;
    let mut dict = text.then(|| config.initial_dictionary_size(v));
    let mut trace = IterationTrace { label: data.label_name(target).to_string(), rule_index, records: Vec::new() };

    let mut fallback: Option<ScoredRule> = None;
    for iteration in 1..=config.max_iterations {
        let last = iteration == config.max_iterations;
        let restrict = |rows: &[u32]| -> Result<View<'_>> {
            let view = data.select(rows.to_vec());
            match dict {
                Some(k) => view.restrict(k),
                None => Ok(view),
            }
        };
        let train = restrict(&pools.train)?;
        let seed = mix_seed(config.seed ^ learner.seed, target, rule_index, iteration);
        let learned = learn_one_rule(learner, &train, target, seed);
        drop(train);
        let rule = match learned {
            Ok(rule) => rule,
            // Nothing separates the classes at this size; a larger dictionary may.
            Err(Error::NoRuleFound { .. }) if !last && dict.is_some_and(|k| k < v) => {
                trace.records.push(IterationRecord {
                    iteration,
                    dictionary_size: dict,
                    rule: None,
                    validation: Coverage::default(),
                    voc: 0.0,
                    decision: Decision::Expanded,
                    injected: 0,
                });
                dict = dict.map(|k| k.saturating_mul(config.expansion_factor).min(v));
                continue;
            }
            Err(Error::NoRuleFound { label }) => match fallback {
                Some(scored) => return Ok((scored, trace)),
                None => return Err(Error::NoRuleFound { label }),
            },
            Err(e) => return Err(e),
        };

        let valid = restrict(&pools.valid)?;
        let cov = coverage(&rule, &valid, target)?;
        let voc = voc_of(cov);

        if voc > config.voc_threshold {
            trace.records.push(IterationRecord {
                iteration,
                dictionary_size: dict,
                rule: Some(rule.clone()),
                validation: cov,
                voc,
                decision: Decision::Accepted,
                injected: 0,
            });
            let scored = ScoredRule { rule, voc, accepted: true, iteration, dictionary_size: dict };
            return Ok((scored, trace));
        }

        let limit = valid.feature_space();
        let (false_pos, keep): (Vec<u32>, Vec<u32>) = pools.valid.iter().partition(|&&r| {
            let ex = data.examples().get(r as usize).expect("row in range");
            ex.label != target && rule.holds(ex, limit)
        });
        drop(valid);
        let injected = false_pos.len();
        pools.valid = keep;
        pools.train.extend(false_pos);

        trace.records.push(IterationRecord {
            iteration,
            dictionary_size: dict,
            rule: Some(rule.clone()),
            validation: cov,
            voc,
            decision: if last { Decision::Fallback } else { Decision::Expanded },
            injected,
        });
        let scored = ScoredRule { rule, voc, accepted: false, iteration, dictionary_size: dict };
        if last {
            return Ok((scored, trace));
        }
        fallback = Some(scored);
        dict = dict.map(|k| k.saturating_mul(config.expansion_factor).min(v));
    }
    unreachable!("max_iterations >= 1 guarantees a return inside the loop")
}

/// Why a label's rule loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxRules,
    PositivesExhausted,
    Patience,
    NoRuleFound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelRun {
    pub rules: Vec<ScoredRule>,
    pub traces: Vec<IterationTrace>,
    pub stop: StopReason,
    /// Pools as they stood when the loop ended.
    pub pools: Pools,
}

/// Repeats [`learn_confident_rule`] for `target`, removing the training positives each rule
/// covers, until `max_rules_per_label` rules exist, the positives run out, or `patience`
/// consecutive rules come back as fallbacks. The dictionary restarts at its initial size for
/// every rule; validation positives are never removed.
pub fn learn_ruleset_iterative(
    data: &Dataset,
    train: &[u32],
    valid: &[u32],
    target: LabelId,
    config: &IterationConfig,
    learner: &LearnerOptions,
) -> Result<LabelRun> {
    config.validate()?;
    learner.validate()?;
    let mut pools = Pools { train: train.to_vec(), valid: valid.to_vec() };
    let mut rules = Vec::new();
    let mut traces = Vec::new();
    let mut consecutive_fallbacks = 0;
    let remaining =
        |pools: &Pools| pools.train.iter().filter(|&&r| data.examples()[r as usize].label == target).count();

    let stop = loop {
        if rules.len() >= config.max_rules_per_label {
            break StopReason::MaxRules;
        }
        if remaining(&pools) == 0 {
            break StopReason::PositivesExhausted;
        }
        let (scored, trace) = match learn_confident_rule(data, &mut pools, target, config, learner, rules.len()) {
            Ok(r) => r,
            Err(Error::NoRuleFound { .. }) => break StopReason::NoRuleFound,
            Err(e) => return Err(e),
        };
        let rule = &scored.rule;
        pools.train.retain(|&r| {
            let ex = &data.examples()[r as usize];
            !(ex.label == target && rule.holds(ex, usize::MAX))
        });
        consecutive_fallbacks = if scored.accepted { 0 } else { consecutive_fallbacks + 1 };
        rules.push(scored);
        traces.push(trace);
        if consecutive_fallbacks >= config.patience {
            break StopReason::Patience;
        }
    };
    Ok(LabelRun { rules, traces, stop, pools })
}

/// One-vs-rest iterative learning over every label; per-label runs are independent and run
/// on the learner's execution mode.
pub fn learn_multiclass(
    data: &Dataset,
    train: &[u32],
    valid: &[u32],
    config: &IterationConfig,
    learner: &LearnerOptions,
) -> Result<(RuleSet, Vec<IterationTrace>)> {
    if data.labels().len() < 2 {
        return Err(Error::InsufficientData("one-vs-rest learning needs at least two labels".into()));
    }
    let runs = learner
        .execution
        .map_range(data.labels().len(), |t| learn_ruleset_iterative(data, train, valid, t as LabelId, config, learner));
    let mut rules = Vec::new();
    let mut traces = Vec::new();
    for run in runs {
        let run = run?;
        rules.extend(run.rules);
        traces.extend(run.traces);
    }
    let rs = RuleSet::new(rules, data.schema(), data.labels().to_vec())?;
    Ok((rs, traces))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedule_for_8000() {
        let c = IterationConfig::default();
        assert_eq!(c.dictionary_schedule(8000), [1000, 2000, 4000, 8000, 8000]);
        assert_eq!(c.dictionary_schedule(9), [2, 4, 8, 9, 9]);
        assert_eq!(c.dictionary_schedule(1), [1, 1, 1, 1, 1]);
    }

    #[test]
    fn config_validation() {
        let ok = IterationConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            IterationConfig { initial_dictionary_fraction: 0.0, ..ok.clone() },
            IterationConfig { expansion_factor: 1, ..ok.clone() },
            IterationConfig { voc_threshold: 1.5, ..ok.clone() },
            IterationConfig { patience: 0, ..ok.clone() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn voc_arithmetic() {
        assert_eq!(voc_of(Coverage { positives: 9, negatives: 1 }), 0.9);
        assert_eq!(voc_of(Coverage::default()), 0.0);
    }
}
