use std::collections::{BTreeMap, BTreeSet};

use confrule::eval::{generate_synthetic, SyntheticSpec};
use confrule::io::{read_cache, write_cache};
use confrule::{Dataset, Features, NgramRange, Vocabulary};
use proptest::prelude::*;

fn words(doc: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in doc.chars() {
        if ch.is_alphanumeric() {
            cur.extend(ch.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Document frequencies by explicit enumeration of every window.
fn df_oracle(corpus: &[String], min_n: usize, max_n: usize) -> BTreeMap<String, usize> {
    let mut df = BTreeMap::new();
    for doc in corpus {
        let toks = words(doc);
        let mut seen = BTreeSet::new();
        for n in min_n..=max_n {
            for start in 0..toks.len() {
                if start + n <= toks.len() {
                    seen.insert(toks[start..start + n].join(" "));
                }
            }
        }
        for g in seen {
            *df.entry(g).or_insert(0) += 1;
        }
    }
    df
}

fn expected_order(df: &BTreeMap<String, usize>, min_df: usize) -> Vec<(String, usize)> {
    // BTreeMap iteration is lexicographic; a stable sort on df keeps that order among ties.
    let mut v: Vec<(String, usize)> = df.iter().filter(|(_, &d)| d >= min_df).map(|(g, &d)| (g.clone(), d)).collect();
    v.sort_by_key(|e| std::cmp::Reverse(e.1));
    v
}

fn contains_gram(doc_tokens: &[String], gram: &str) -> bool {
    let parts: Vec<&str> = gram.split(' ').collect();
    doc_tokens.windows(parts.len()).any(|w| w.iter().zip(&parts).all(|(a, b)| a == b))
}

fn zipf_corpus(docs: usize, seed: u64) -> Vec<String> {
    let spec = SyntheticSpec { vocabulary_size: 300, document_count: docs, seed, ..SyntheticSpec::default() };
    generate_synthetic(&spec).unwrap().0.docs
}

#[test]
fn zipf_corpus_ranks_match_df_oracle() {
    let corpus = zipf_corpus(1000, 42);
    let vocab = Vocabulary::build(&corpus, 5, NgramRange::default()).unwrap();
    let expected = expected_order(&df_oracle(&corpus, 1, 3), 5);
    let got: Vec<(String, usize)> = vocab.features().iter().map(|f| (f.gram.clone(), f.document_frequency)).collect();
    assert_eq!(got.len(), expected.len());
    assert_eq!(got, expected);
    assert!(vocab.features().windows(2).all(|w| w[0].document_frequency >= w[1].document_frequency));
}

#[test]
fn vectorize_matches_naive_scan() {
    let corpus = zipf_corpus(50, 9);
    let vocab = Vocabulary::build(&corpus, 2, NgramRange::default()).unwrap();
    let labels = vec!["x"; corpus.len()];
    let data = Dataset::from_text(&corpus, &labels, vocab.clone()).unwrap();
    for (doc, ex) in corpus.iter().zip(data.examples()) {
        let toks = words(doc);
        let expected: Vec<u32> =
            (0..vocab.len()).filter(|&r| contains_gram(&toks, vocab.gram(r).unwrap())).map(|r| r as u32).collect();
        let Features::Text(ranks) = &ex.features else { panic!("text mode") };
        assert_eq!(ranks, &expected);
    }
}

#[test]
fn build_is_deterministic() {
    let corpus = zipf_corpus(300, 1);
    let a = Vocabulary::build(&corpus, 3, NgramRange::default()).unwrap();
    let b = Vocabulary::build(&corpus, 3, NgramRange::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.fingerprint(), b.fingerprint());
    let labels = vec!["x"; corpus.len()];
    let da = Dataset::from_text(&corpus, &labels, a).unwrap();
    let db = Dataset::from_text(&corpus, &labels, b).unwrap();
    assert_eq!(da.examples(), db.examples());
}

#[test]
fn restriction_is_a_prefix_filter_and_leaves_data_alone() {
    let corpus = zipf_corpus(200, 3);
    let vocab = Vocabulary::build(&corpus, 5, NgramRange::default()).unwrap();
    let v = vocab.len();
    let labels = vec!["x"; corpus.len()];
    let data = Dataset::from_text(&corpus, &labels, vocab).unwrap();
    let before = data.examples().to_vec();

    let k = v.div_ceil(8);
    let view = data.restrict(k).unwrap();
    for r in view.rows() {
        assert!(view.present(*r).iter().all(|&x| (x as usize) < k));
    }
    let full = data.restrict(v).unwrap();
    for r in full.rows() {
        let Features::Text(all) = &data.examples()[*r as usize].features else { unreachable!() };
        assert_eq!(full.present(*r), &all[..]);
    }
    assert!(data.restrict(0).is_err());
    assert!(data.restrict(v + 1).is_err());
    assert_eq!(data.examples(), &before[..]);
}

#[test]
fn dataset_cache_round_trip() {
    let corpus = zipf_corpus(120, 4);
    let labels: Vec<String> = (0..corpus.len()).map(|i| ["a", "b", "c"][i % 3].to_string()).collect();
    let vocab = Vocabulary::build(&corpus, 2, NgramRange::default()).unwrap();
    let data = Dataset::from_text(&corpus, &labels, vocab).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dataset.bin");
    write_cache(&path, &data, 77).unwrap();
    let back = read_cache(&path, 77).unwrap().expect("tag matches");
    assert_eq!(back.examples(), data.examples());
    assert_eq!(back.labels(), data.labels());
    assert_eq!(back.vocabulary(), data.vocabulary());
    assert!(read_cache(&path, 78).unwrap().is_none());

    let mut bytes = std::fs::read(&path).unwrap();
    bytes.truncate(bytes.len() - 3);
    std::fs::write(&path, &bytes).unwrap();
    assert!(read_cache(&path, 77).is_err());
}

fn small_corpus() -> impl Strategy<Value = Vec<String>> {
    let word = prop::sample::select(vec!["a", "b", "c", "d", "e", "ab", "Q9"]);
    let sep = prop::sample::select(vec![" ", ", ", "!", "  "]);
    let doc = prop::collection::vec((word, sep), 0..12)
        .prop_map(|ws| ws.into_iter().map(|(w, s)| format!("{w}{s}")).collect::<String>());
    prop::collection::vec(doc, 1..40)
}

proptest! {
    #[test]
    fn vocabulary_matches_oracle(corpus in small_corpus(), min_df in 1usize..4) {
        let expected = expected_order(&df_oracle(&corpus, 1, 3), min_df);
        match Vocabulary::build(&corpus, min_df, NgramRange::default()) {
            Ok(vocab) => {
                let got: Vec<(String, usize)> =
                    vocab.features().iter().map(|f| (f.gram.clone(), f.document_frequency)).collect();
                prop_assert_eq!(got, expected);
            }
            Err(_) => prop_assert!(expected.is_empty()),
        }
    }

    #[test]
    fn restriction_prefix_coherence(corpus in small_corpus(), a in 1usize..200, b in 1usize..200) {
        let Ok(vocab) = Vocabulary::build(&corpus, 1, NgramRange::default()) else { return Ok(()) };
        let v = vocab.len();
        let (k1, k2) = ((a % v) + 1, (b % v) + 1);
        let (k1, k2) = (k1.max(k2), k1.min(k2));
        let labels = vec!["x"; corpus.len()];
        let data = Dataset::from_text(&corpus, &labels, vocab).unwrap();
        let twice = data.restrict(k1).unwrap().restrict(k2).unwrap();
        let once = data.restrict(k2).unwrap();
        prop_assert_eq!(twice.feature_space(), once.feature_space());
        for r in once.rows() {
            prop_assert_eq!(twice.present(*r), once.present(*r));
        }
    }
}
