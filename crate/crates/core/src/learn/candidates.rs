//! Candidate literals and FOIL information gain.

use std::cmp::Ordering;

use crate::dataset::{AttributeKind, Features, Mode, Schema, Value, View};
use crate::exec::Execution;
use crate::rule::Condition;

/// FOIL information gain of specializing a rule covering `(p0, n0)` to one covering `(p1, n1)`:
/// `p1 * (log2(p1 / (p1 + n1)) - log2(p0 / (p0 + n0)))`.
///
/// Returns negative infinity when `p1 == 0`, so such literals are never selected.
pub fn foil_gain(p0: usize, n0: usize, p1: usize, n1: usize) -> f64 {
    if p1 == 0 || p0 == 0 {
        return f64::NEG_INFINITY;
    }
    let before = (p0 as f64 / (p0 + n0) as f64).log2();
    let after = (p1 as f64 / (p1 + n1) as f64).log2();
    p1 as f64 * (after - before)
}

/// A literal that could extend the current rule, with the coverage it would leave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub condition: Condition,
    pub positives: usize,
    pub negatives: usize,
    pub gain: f64,
}

/// Strict improvement: higher gain, or equal gain and earlier in the tie order.
fn better(a: &Candidate, b: &Candidate) -> bool {
    match a.gain.total_cmp(&b.gain) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a.condition.tie_order(&b.condition) == Ordering::Less,
    }
}

fn pick(best: &mut Option<Candidate>, c: Candidate) {
    if best.as_ref().is_none_or(|b| better(&c, b)) {
        *best = Some(c);
    }
}

/// The highest-gain literal over the view's feature space given the rows the rule currently
/// covers. Attributes already tested by `used` are skipped, except numeric attributes, which
/// may receive a second bound.
pub(crate) fn best_candidate(
    view: &View<'_>,
    pos: &[u32],
    neg: &[u32],
    used: &[Condition],
    exec: Execution,
) -> Option<Candidate> {
    let (p0, n0) = (pos.len(), neg.len());
    match view.mode() {
        Mode::Text => {
            let width = view.feature_space();
            let pc = exec.histogram(pos, width, |&r| view.present(r).iter().map(|&x| x as usize));
            let nc = exec.histogram(neg, width, |&r| view.present(r).iter().map(|&x| x as usize));
            let mut used_ranks: Vec<usize> = used.iter().map(|c| c.attribute).collect();
            used_ranks.sort_unstable();
            let per_rank = exec.map_range(width, |rank| {
                if used_ranks.binary_search(&rank).is_ok() {
                    return None;
                }
                let (p, n) = (pc[rank] as usize, nc[rank] as usize);
                let present = Candidate {
                    condition: Condition::present(rank),
                    positives: p,
                    negatives: n,
                    gain: foil_gain(p0, n0, p, n),
                };
                let absent = Candidate {
                    condition: Condition::absent(rank),
                    positives: p0 - p,
                    negatives: n0 - n,
                    gain: foil_gain(p0, n0, p0 - p, n0 - n),
                };
                Some(if better(&absent, &present) { absent } else { present })
            });
            let mut best = None;
            for c in per_rank.into_iter().flatten() {
                pick(&mut best, c);
            }
            best
        }
        Mode::Tabular => {
            let Schema::Tabular(schema) = view.dataset().schema() else {
                unreachable!("tabular view over text schema")
            };
            let per_attr = exec.map_range(schema.attributes.len(), |a| {
                let attr = &schema.attributes[a];
                match &attr.kind {
                    AttributeKind::Nominal(symbols) => {
                        if used.iter().any(|c| c.attribute == a) {
                            return None;
                        }
                        nominal_best(view, pos, neg, a, symbols.len())
                    }
                    AttributeKind::Numeric => numeric_best(view, pos, neg, a),
                }
            });
            let mut best = None;
            for c in per_attr.into_iter().flatten() {
                pick(&mut best, c);
            }
            best
        }
    }
}

fn nominal_value(view: &View<'_>, row: u32, a: usize) -> Option<u32> {
    match &view.example(row).features {
        Features::Tabular(values) => match values.get(a) {
            Some(Value::Nominal(s)) => Some(*s),
            _ => None,
        },
        Features::Text(_) => None,
    }
}

fn numeric_value(view: &View<'_>, row: u32, a: usize) -> Option<f64> {
    match &view.example(row).features {
        Features::Tabular(values) => match values.get(a) {
            Some(Value::Numeric(x)) => Some(*x),
            _ => None,
        },
        Features::Text(_) => None,
    }
}

fn nominal_best(view: &View<'_>, pos: &[u32], neg: &[u32], a: usize, n_symbols: usize) -> Option<Candidate> {
    let mut pc = vec![0usize; n_symbols];
    let mut nc = vec![0usize; n_symbols];
    for &r in pos {
        if let Some(s) = nominal_value(view, r, a) {
            pc[s as usize] += 1;
        }
    }
    for &r in neg {
        if let Some(s) = nominal_value(view, r, a) {
            nc[s as usize] += 1;
        }
    }
    let mut best = None;
    for s in 0..n_symbols {
        pick(
            &mut best,
            Candidate {
                condition: Condition::equals(a, s as u32),
                positives: pc[s],
                negatives: nc[s],
                gain: foil_gain(pos.len(), neg.len(), pc[s], nc[s]),
            },
        );
    }
    best
}

/// Cut points are midpoints between adjacent distinct values whose groups are not both pure
/// in the same class.
fn numeric_best(view: &View<'_>, pos: &[u32], neg: &[u32], a: usize) -> Option<Candidate> {
    let (p0, n0) = (pos.len(), neg.len());
    let mut pts: Vec<(f64, bool)> = pos
        .iter()
        .filter_map(|&r| numeric_value(view, r, a).map(|x| (x, true)))
        .chain(neg.iter().filter_map(|&r| numeric_value(view, r, a).map(|x| (x, false))))
        .collect();
    pts.sort_by(|x, y| x.0.total_cmp(&y.0));
    // (value, positives at value, negatives at value)
    let mut groups: Vec<(f64, usize, usize)> = Vec::new();
    for (x, is_pos) in pts {
        match groups.last_mut() {
            Some(g) if g.0 == x => {
                if is_pos {
                    g.1 += 1
                } else {
                    g.2 += 1
                }
            }
            _ => groups.push((x, usize::from(is_pos), usize::from(!is_pos))),
        }
    }
    let mut best = None;
    let (mut p_le, mut n_le) = (0, 0);
    for w in groups.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        p_le += lo.1;
        n_le += lo.2;
        let pure_same = (lo.2 == 0 && hi.2 == 0) || (lo.1 == 0 && hi.1 == 0);
        if pure_same {
            continue;
        }
        let cut = lo.0 + (hi.0 - lo.0) / 2.0;
        pick(
            &mut best,
            Candidate {
                condition: Condition::less_equal(a, cut),
                positives: p_le,
                negatives: n_le,
                gain: foil_gain(p0, n0, p_le, n_le),
            },
        );
        pick(
            &mut best,
            Candidate {
                condition: Condition::greater_equal(a, cut),
                positives: p0 - p_le,
                negatives: n0 - n_le,
                gain: foil_gain(p0, n0, p0 - p_le, n0 - n_le),
            },
        );
    }
    best
}

/// Number of distinct conditions the learner could emit over the view's feature space, used as
/// the universe size when encoding rules.
pub(crate) fn condition_universe(view: &View<'_>) -> f64 {
    match view.dataset().schema() {
        Schema::Text(_) => 2.0 * view.feature_space() as f64,
        Schema::Tabular(schema) => schema
            .attributes
            .iter()
            .enumerate()
            .map(|(a, attr)| match &attr.kind {
                AttributeKind::Nominal(symbols) => symbols.len() as f64,
                AttributeKind::Numeric => {
                    let mut xs: Vec<f64> = view.rows().iter().filter_map(|&r| numeric_value(view, r, a)).collect();
                    xs.sort_by(f64::total_cmp);
                    xs.dedup();
                    2.0 * xs.len() as f64
                }
            })
            .sum(),
    }
}
