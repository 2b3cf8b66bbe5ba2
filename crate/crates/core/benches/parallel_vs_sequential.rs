//! Sequential versus rayon execution of the data-parallel inner loops.
//!
//! Build with `--no-default-features` to see both arms fall back to the sequential path.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use confrule::eval::{evaluate, generate_synthetic, split, KeywordSpec, PlantedRule, Split, SplitSpec, SyntheticSpec};
use confrule::learn::foil::grow;
use confrule::{
    learn_baseline, learn_multiclass, Dataset, Execution, IterationConfig, LearnerKind, LearnerOptions, NgramRange,
    Vocabulary,
};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn corpus(docs: usize, words: usize, noise: f64) -> (Dataset, Split) {
    let kw = |w: &str, r: f64| KeywordSpec { word: w.into(), doc_rate: r };
    let spec = SyntheticSpec {
        vocabulary_size: words,
        document_count: docs,
        min_doc_length: 20,
        max_doc_length: 50,
        keywords: vec![kw("alpha", 0.1), kw("beta", 0.25), kw("gamma", 0.3)],
        planted_rules: vec![
            PlantedRule { label: "pos".into(), present: vec!["alpha".into()], absent: vec![] },
            PlantedRule { label: "pos".into(), present: vec!["beta".into()], absent: vec!["gamma".into()] },
        ],
        label_noise_rate: noise,
        seed: 1,
        ..SyntheticSpec::default()
    };
    let (c, _) = generate_synthetic(&spec).expect("valid spec");
    let vocab = Vocabulary::build(&c.docs, 5, NgramRange::default()).expect("non-empty vocabulary");
    let data = Dataset::from_text(&c.docs, &c.labels, vocab).expect("consistent corpus");
    let sp = split(&data, &SplitSpec::default()).expect("enough examples");
    (data, sp)
}

fn bench_grow(c: &mut Criterion) {
    let (data, _) = corpus(8000, 5000, 0.05);
    let view = data.view();
    let (pos, neg) = view.partition_by_label(data.label_id("pos").unwrap());
    let mut group = c.benchmark_group("grow");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, view.feature_space()), |b| {
            b.iter(|| grow(black_box(&view), &pos, &neg, 16, exec, "pos").unwrap())
        });
    }
    group.finish();
}

fn bench_evaluate(c: &mut Criterion) {
    let (data, sp) = corpus(8000, 5000, 0.05);
    let learner = LearnerOptions::new(LearnerKind::Foil);
    let rs = learn_baseline(&learner, &data.select(sp.train_and_valid())).unwrap();
    let test = data.view();
    let thresholds = [0.0, 0.6, 0.7, 0.8, 0.9];
    let mut group = c.benchmark_group("evaluate");
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| evaluate(&rs, black_box(&test), &thresholds, exec).unwrap()));
    }
    group.finish();
}

fn bench_iterative(c: &mut Criterion) {
    let (data, sp) = corpus(4000, 3000, 0.1);
    let config = IterationConfig::default();
    let mut group = c.benchmark_group("learn_multiclass");
    group.sample_size(10);
    for kind in [LearnerKind::Foil, LearnerKind::Ripper] {
        for (name, exec) in MODES {
            let learner = LearnerOptions { execution: exec, ..LearnerOptions::new(kind) };
            group.bench_function(BenchmarkId::new(name, kind.as_str()), |b| {
                b.iter(|| learn_multiclass(black_box(&data), &sp.train, &sp.valid, &config, &learner).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_grow, bench_evaluate, bench_iterative);
criterion_main!(benches);
