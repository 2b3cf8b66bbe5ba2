use confrule::dataset::TabularSchema;
use confrule::learn::foil::grow;
use confrule::learn::learn_rules;
use confrule::learn::ripper::{learn_ruleset, prune};
use confrule::{Condition, Dataset, Execution, LearnerKind, LearnerOptions, NgramRange, Test, Vocabulary};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gain_oracle(p0: usize, n0: usize, p1: usize, n1: usize) -> f64 {
    if p1 == 0 {
        return f64::NEG_INFINITY;
    }
    let info = |p: usize, n: usize| -((p as f64) / ((p + n) as f64)).log2();
    p1 as f64 * (info(p0, n0) - info(p1, n1))
}

/// Binary text dataset: `rows[i]` lists the feature names present in document i.
fn binary_dataset(rows: &[Vec<usize>], labels: &[&str], features: usize) -> Dataset {
    let mut docs: Vec<String> =
        rows.iter().map(|r| r.iter().map(|f| format!("f{f}")).collect::<Vec<_>>().join(" ")).collect();
    // Anchor document so every feature is in the vocabulary; labelled with a throwaway class.
    docs.push((0..features).map(|f| format!("f{f}")).collect::<Vec<_>>().join(" "));
    let mut labels = labels.to_vec();
    labels.push("anchor");
    let vocab = Vocabulary::build(&docs, 1, NgramRange { min: 1, max: 1 }).unwrap();
    Dataset::from_text(&docs, &labels, vocab).unwrap()
}

fn holds(data: &Dataset, c: &Condition, row: u32) -> bool {
    let confrule::Features::Text(ranks) = &data.examples()[row as usize].features else { unreachable!() };
    let present = ranks.contains(&(c.attribute as u32));
    match c.test {
        Test::Present => present,
        Test::Absent => !present,
        _ => unreachable!(),
    }
}

#[test]
fn foil_recovers_planted_conjunction() {
    // pos iff f1 and not f2; the remaining features are noise.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..400 {
        let row: Vec<usize> = (0..6).filter(|_| rng.random_bool(0.5)).collect();
        let pos = row.contains(&1) && !row.contains(&2);
        labels.push(if pos { "pos" } else { "neg" });
        rows.push(row);
    }
    let data = binary_dataset(&rows, &labels, 6);
    let vocab = data.vocabulary().unwrap();
    let f = |i: usize| vocab.rank_of(&format!("f{i}")).unwrap();

    // Brute force over every conjunction of at most two literals: the only pure ones with
    // maximal positive coverage are {f1, not f2} in either order.
    let view = data.view();
    let target = data.label_id("pos").unwrap();
    let (pos, neg) = view.partition_by_label(target);
    let literals: Vec<Condition> =
        (0..vocab.len()).flat_map(|r| [Condition::present(r), Condition::absent(r)]).collect();
    let mut best: Option<(usize, Vec<Vec<Condition>>)> = None;
    for (i, a) in literals.iter().enumerate() {
        for b in literals[i..].iter() {
            let conj = if a == b { vec![*a] } else { vec![*a, *b] };
            let covers = |r: &u32| conj.iter().all(|c| holds(&data, c, *r));
            if neg.iter().any(covers) {
                continue;
            }
            let p = pos.iter().filter(|r| covers(r)).count();
            match &mut best {
                Some((bp, v)) if p == *bp => v.push(conj),
                Some((bp, _)) if p < *bp => {}
                _ => best = Some((p, vec![conj])),
            }
        }
    }
    let (_, winners) = best.unwrap();
    assert_eq!(winners.len(), 1);
    let mut planted = winners[0].clone();
    planted.sort_by_key(|c| c.attribute);
    let mut expected = vec![Condition::present(f(1)), Condition::absent(f(2))];
    expected.sort_by_key(|c| c.attribute);
    assert_eq!(planted, expected);

    let opts = LearnerOptions::new(LearnerKind::Foil);
    let rules = learn_rules(&opts, &view, target).unwrap();
    assert_eq!(rules.len(), 1);
    let mut got = rules[0].conditions.clone();
    got.sort_by_key(|c| c.attribute);
    assert_eq!(got, planted);
}

#[test]
fn ripper_keeps_noise_rulesets_small() {
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..300 {
            rows.push((0..10).filter(|_| rng.random_bool(0.3)).collect::<Vec<_>>());
            labels.push(if rng.random_bool(0.5) { "pos" } else { "neg" });
        }
        let data = binary_dataset(&rows, &labels, 10);
        let opts = LearnerOptions { seed, ..LearnerOptions::new(LearnerKind::Ripper) };
        let out = learn_ruleset(&data.view(), data.label_id("pos").unwrap(), &opts).unwrap();
        assert!(out.rules.len() <= 3, "seed {seed}: {} rules on pure noise", out.rules.len());
    }
}

#[test]
fn tabular_thresholds_and_symbols() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let names = vec!["size".to_string(), "color".to_string()];
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..200 {
        let size: u32 = rng.random_range(0..20);
        let color = ["red", "green", "blue"][rng.random_range(0..3)];
        labels.push(if size >= 12 && color != "blue" { "big" } else { "other" });
        rows.push(vec![size.to_string(), color.to_string()]);
    }
    let (schema, values) = TabularSchema::infer(&names, &rows).unwrap();
    let data = Dataset::from_tabular(schema, values, &labels).unwrap();
    let target = data.label_id("big").unwrap();
    for kind in [LearnerKind::Foil, LearnerKind::Ripper] {
        let rules = learn_rules(&LearnerOptions::new(kind), &data.view(), target).unwrap();
        let view = data.view();
        for (ex, label) in view.iter().zip(&labels) {
            let fires = rules.iter().any(|r| r.matches(ex).unwrap());
            assert_eq!(fires, *label == "big", "{kind:?}");
        }
        assert!(rules
            .iter()
            .all(|r| r.conditions.iter().any(|c| matches!(c.test, Test::GreaterEqual(x) if x > 11.0 && x < 12.0))));
    }
}

#[test]
fn sequential_and_parallel_learn_identical_rules() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..600 {
        let row: Vec<usize> = (0..30).filter(|_| rng.random_bool(0.2)).collect();
        let label = if row.contains(&3) || (row.contains(&7) && rng.random_bool(0.8)) { "pos" } else { "neg" };
        labels.push(label);
        rows.push(row);
    }
    let data = binary_dataset(&rows, &labels, 30);
    for kind in [LearnerKind::Foil, LearnerKind::Ripper] {
        let seq = LearnerOptions { execution: Execution::Sequential, ..LearnerOptions::new(kind) };
        let par = LearnerOptions { execution: Execution::Parallel, ..seq.clone() };
        let target = data.label_id("pos").unwrap();
        assert_eq!(learn_rules(&seq, &data.view(), target).unwrap(), learn_rules(&par, &data.view(), target).unwrap());
    }
}

fn random_instance() -> impl Strategy<Value = (Vec<Vec<usize>>, Vec<bool>, usize)> {
    (2usize..=12).prop_flat_map(|features| {
        prop::collection::vec((prop::collection::btree_set(0..features, 0..=features), any::<bool>()), 2..=40).prop_map(
            move |rows| {
                let (r, l): (Vec<_>, Vec<_>) = rows.into_iter().map(|(s, l)| (s.into_iter().collect(), l)).unzip();
                (r, l, features)
            },
        )
    })
}

proptest! {
    #[test]
    fn every_greedy_step_attains_the_maximum_gain((rows, flags, features) in random_instance()) {
        prop_assume!(flags.iter().any(|&b| b));
        let labels: Vec<&str> = flags.iter().map(|&b| if b { "pos" } else { "neg" }).collect();
        let data = binary_dataset(&rows, &labels, features);
        let view = data.view();
        let target = data.label_id("pos").unwrap();
        let (pos, neg) = view.partition_by_label(target);
        let Ok(grown) = grow(&view, &pos, &neg, 16, Execution::Sequential, "pos") else { return Ok(()) };
        let (mut p, mut n) = (pos.clone(), neg.clone());
        for (step, cond) in grown.steps.iter().zip(&grown.conditions) {
            let mut max = f64::NEG_INFINITY;
            for r in 0..view.feature_space() {
                for lit in [Condition::present(r), Condition::absent(r)] {
                    let p1 = p.iter().filter(|&&x| holds(&data, &lit, x)).count();
                    let n1 = n.iter().filter(|&&x| holds(&data, &lit, x)).count();
                    max = max.max(gain_oracle(p.len(), n.len(), p1, n1));
                }
            }
            let p1 = p.iter().filter(|&&x| holds(&data, cond, x)).count();
            let n1 = n.iter().filter(|&&x| holds(&data, cond, x)).count();
            let chosen = gain_oracle(p.len(), n.len(), p1, n1);
            prop_assert!((chosen - max).abs() < 1e-9, "chosen {} max {}", chosen, max);
            prop_assert!((step.chosen.gain - chosen).abs() < 1e-9);
            p.retain(|&x| holds(&data, cond, x));
            n.retain(|&x| holds(&data, cond, x));
        }
    }

    #[test]
    fn pruning_keeps_the_best_prefix(
        (rows, flags, features) in random_instance(),
        picks in prop::collection::vec((0usize..12, any::<bool>()), 1..6),
    ) {
        let labels: Vec<&str> = flags.iter().map(|&b| if b { "pos" } else { "neg" }).collect();
        let data = binary_dataset(&rows, &labels, features);
        let vocab = data.vocabulary().unwrap();
        let mut conds: Vec<Condition> = Vec::new();
        for (f, present) in picks {
            let r = vocab.rank_of(&format!("f{}", f % features)).unwrap();
            if conds.iter().all(|c| c.attribute != r) {
                conds.push(if present { Condition::present(r) } else { Condition::absent(r) });
            }
        }
        let view = data.view();
        let (pos, neg) = view.partition_by_label(data.label_id("neg").unwrap_or(0));
        let pruned = prune(&conds, &view, &pos, &neg);

        let value = |len: usize| {
            let covers = |r: &&u32| conds[..len].iter().all(|c| holds(&data, c, **r));
            let p = pos.iter().filter(covers).count() as f64;
            let n = neg.iter().filter(covers).count() as f64;
            (p + n > 0.0).then(|| (p - n) / (p + n))
        };
        let best = (1..=conds.len()).filter_map(value).fold(f64::NEG_INFINITY, f64::max);
        match value(pruned.len()) {
            Some(v) => {
                prop_assert_eq!(&pruned[..], &conds[..pruned.len()]);
                prop_assert!((v - best).abs() < 1e-12);
                prop_assert!((1..pruned.len()).all(|l| value(l).is_none_or(|u| u < v)));
            }
            None => {
                prop_assert_eq!(best, f64::NEG_INFINITY);
                prop_assert_eq!(pruned, conds);
            }
        }
    }
}
