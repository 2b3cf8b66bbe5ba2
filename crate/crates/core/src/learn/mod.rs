//! Base rule learners: propositional FOIL and a RIPPER-style grow/prune learner.

pub mod candidates;
pub mod foil;
pub mod ripper;

use serde::{Deserialize, Serialize};

use crate::dataset::{LabelId, View};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rule::{coverage, Condition, Rule, RuleSet, ScoredRule};

pub use candidates::{foil_gain, Candidate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    Foil,
    Ripper,
}

impl LearnerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LearnerKind::Foil => "FOIL",
            LearnerKind::Ripper => "RIPPER",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerOptions {
    pub kind: LearnerKind,
    pub max_conditions: usize,
    /// Share of rows RIPPER grows on; the rest is used for pruning.
    pub grow_fraction: f64,
    pub mdl_slack_bits: f64,
    pub max_rules_per_label: usize,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for LearnerOptions {
    fn default() -> Self {
        LearnerOptions {
            kind: LearnerKind::Foil,
            max_conditions: 16,
            grow_fraction: 2.0 / 3.0,
            mdl_slack_bits: 64.0,
            max_rules_per_label: 10,
            seed: 0,
            execution: Execution::default(),
        }
    }
}

impl LearnerOptions {
    pub fn new(kind: LearnerKind) -> Self {
        LearnerOptions { kind, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.grow_fraction > 0.0 && self.grow_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!("grow_fraction must lie in (0, 1), got {}", self.grow_fraction)));
        }
        if self.max_conditions == 0 {
            return Err(Error::InvalidConfig("max_conditions must be at least 1".into()));
        }
        if self.mdl_slack_bits.is_nan() || self.mdl_slack_bits < 0.0 {
            return Err(Error::InvalidConfig("mdl_slack_bits must be non-negative".into()));
        }
        Ok(())
    }
}

/// Learns a single rule for `target` on `train`.
///
/// FOIL grows on all of `train`; RIPPER splits `train` into grow and prune partitions using
/// `seed` and prunes the grown rule.
pub fn learn_one_rule(opts: &LearnerOptions, train: &View<'_>, target: LabelId, seed: u64) -> Result<Rule> {
    let label = train.dataset().label_name(target).to_string();
    let (pos, neg) = train.partition_by_label(target);
    if pos.is_empty() {
        return Err(Error::NoRuleFound { label });
    }
    let conditions = match opts.kind {
        LearnerKind::Foil => foil::grow(train, &pos, &neg, opts.max_conditions, opts.execution, &label)?.conditions,
        LearnerKind::Ripper => ripper::learn_one(train, &pos, &neg, opts, seed, &label)?.1,
    };
    Rule::new(label, conditions)
}

/// Plain sequential covering for one label without validation gating.
pub fn learn_rules(opts: &LearnerOptions, train: &View<'_>, target: LabelId) -> Result<Vec<Rule>> {
    let label = train.dataset().label_name(target).to_string();
    let mk = |conds: Vec<Condition>| Rule::new(label.clone(), conds);
    match opts.kind {
        LearnerKind::Ripper => ripper::learn_ruleset(train, target, opts)?.rules.into_iter().map(mk).collect(),
        LearnerKind::Foil => {
            let limit = train.feature_space();
            let (mut pos, neg) = train.partition_by_label(target);
            let mut rules = Vec::new();
            while rules.len() < opts.max_rules_per_label && !pos.is_empty() {
                let grown = match foil::grow(train, &pos, &neg, opts.max_conditions, opts.execution, &label) {
                    Ok(g) => g,
                    Err(Error::NoRuleFound { .. }) => break,
                    Err(e) => return Err(e),
                };
                let rule = mk(grown.conditions)?;
                pos.retain(|&r| !rule.holds(train.example(r), limit));
                rules.push(rule);
            }
            Ok(rules)
        }
    }
}

/// One-vs-rest baseline over every label of `train`.
///
/// Rules carry their training precision as confidence (`iteration` 0), so the usual ordering
/// and threshold filtering still apply.
pub fn learn_baseline(opts: &LearnerOptions, train: &View<'_>) -> Result<RuleSet> {
    opts.validate()?;
    let data = train.dataset();
    let dictionary = (train.mode() == crate::dataset::Mode::Text).then(|| train.feature_space());
    let per_label: Vec<Result<Vec<ScoredRule>>> = opts.execution.map_range(data.labels().len(), |t| {
        let target = t as LabelId;
        learn_rules(opts, train, target)?
            .into_iter()
            .map(|rule| {
                let cov = coverage(&rule, train, target)?;
                Ok(ScoredRule {
                    voc: if cov.total() == 0 { 0.0 } else { cov.positives as f64 / cov.total() as f64 },
                    rule,
                    accepted: true,
                    iteration: 0,
                    dictionary_size: dictionary,
                })
            })
            .collect()
    });
    let mut rules = Vec::new();
    for r in per_label {
        rules.extend(r?);
    }
    RuleSet::new(rules, data.schema(), data.labels().to_vec())
}
