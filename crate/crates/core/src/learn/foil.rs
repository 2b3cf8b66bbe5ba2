//! Greedy FOIL-gain rule growth.

use crate::dataset::View;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rule::Condition;

use super::candidates::{best_candidate, Candidate};

/// One greedy specialization step.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowStep {
    /// Coverage of the rule before the step.
    pub positives_before: usize,
    pub negatives_before: usize,
    pub chosen: Candidate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grown {
    pub conditions: Vec<Condition>,
    pub steps: Vec<GrowStep>,
}

/// Adds the maximal-gain literal until the rule covers no negatives, no literal has positive
/// gain, or `max_conditions` is reached.
pub fn grow(
    view: &View<'_>,
    positives: &[u32],
    negatives: &[u32],
    max_conditions: usize,
    exec: Execution,
    label: &str,
) -> Result<Grown> {
    let limit = view.feature_space();
    let mut pos = positives.to_vec();
    let mut neg = negatives.to_vec();
    let mut conditions: Vec<Condition> = Vec::new();
    let mut steps = Vec::new();
    while !neg.is_empty() && conditions.len() < max_conditions {
        let Some(best) = best_candidate(view, &pos, &neg, &conditions, exec) else {
            break;
        };
        if best.gain.is_nan() || best.gain <= 0.0 {
            break;
        }
        steps.push(GrowStep { positives_before: pos.len(), negatives_before: neg.len(), chosen: best });
        let c = best.condition;
        pos.retain(|&r| c.holds(view.example(r), limit));
        neg.retain(|&r| c.holds(view.example(r), limit));
        debug_assert_eq!((pos.len(), neg.len()), (best.positives, best.negatives));
        conditions.push(c);
    }
    if conditions.is_empty() {
        return Err(Error::NoRuleFound { label: label.to_string() });
    }
    Ok(Grown { conditions, steps })
}
