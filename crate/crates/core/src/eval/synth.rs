//! Synthetic corpora with planted keyword rules.
//!
//! Documents are bags of filler words `w0 .. w{n-1}` drawn from a Zipf distribution, plus
//! planted keywords inserted independently at per-keyword document rates. Labels come from the
//! first planted rule a document satisfies (else the default label) and are then flipped to a
//! different label with probability `label_noise_rate`. Filler, keyword and label draws use
//! separate random streams, so changing a keyword rate leaves the filler text untouched.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vocab::{NgramRange, Vocabulary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeywordSpec {
    pub word: String,
    /// Probability that a document contains the keyword.
    pub doc_rate: f64,
}

/// `label` holds when every `present` keyword occurs and no `absent` keyword does.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantedRule {
    pub label: String,
    #[serde(default)]
    pub present: Vec<String>,
    #[serde(default)]
    pub absent: Vec<String>,
}

impl PlantedRule {
    pub fn holds(&self, keywords: &BTreeSet<&str>) -> bool {
        self.present.iter().all(|w| keywords.contains(w.as_str()))
            && self.absent.iter().all(|w| !keywords.contains(w.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    /// Number of distinct filler words.
    pub vocabulary_size: usize,
    pub document_count: usize,
    pub keywords: Vec<KeywordSpec>,
    pub planted_rules: Vec<PlantedRule>,
    pub default_label: String,
    pub label_noise_rate: f64,
    pub min_doc_length: usize,
    pub max_doc_length: usize,
    pub zipf_exponent: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            vocabulary_size: 600,
            document_count: 2000,
            keywords: Vec::new(),
            planted_rules: Vec::new(),
            default_label: "neg".into(),
            label_noise_rate: 0.0,
            min_doc_length: 10,
            max_doc_length: 30,
            zipf_exponent: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub docs: Vec<String>,
    pub labels: Vec<String>,
    /// Labels before noise.
    pub clean_labels: Vec<String>,
    pub flipped: Vec<bool>,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.vocabulary_size == 0 || self.document_count == 0 {
            return bad("vocabulary_size and document_count must be positive".into());
        }
        if self.min_doc_length == 0 || self.min_doc_length > self.max_doc_length {
            return bad("need 1 <= min_doc_length <= max_doc_length".into());
        }
        if !(0.0..0.5).contains(&self.label_noise_rate) {
            return bad(format!("label_noise_rate must lie in [0, 0.5), got {}", self.label_noise_rate));
        }
        if self.zipf_exponent.is_nan() || self.zipf_exponent < 0.0 {
            return bad("zipf_exponent must be non-negative".into());
        }
        let mut seen = BTreeSet::new();
        for k in &self.keywords {
            if !(0.0..=1.0).contains(&k.doc_rate) {
                return bad(format!("doc_rate of {:?} must lie in [0, 1]", k.word));
            }
            if crate::text::tokenize(&k.word) != [k.word.clone()] || is_filler(&k.word) {
                return bad(format!("keyword {:?} must be one lowercase token outside the filler words", k.word));
            }
            if !seen.insert(k.word.as_str()) {
                return bad(format!("duplicate keyword {:?}", k.word));
            }
        }
        for r in &self.planted_rules {
            if r.present.is_empty() && r.absent.is_empty() {
                return bad(format!("planted rule for {:?} has no conditions", r.label));
            }
            for w in r.present.iter().chain(&r.absent) {
                if !seen.contains(w.as_str()) {
                    return bad(format!("planted rule uses undeclared keyword {w:?}"));
                }
            }
        }
        if self.label_noise_rate > 0.0 && self.label_set().len() < 2 {
            return bad("label noise needs at least two labels".into());
        }
        Ok(())
    }

    /// Planted labels plus the default label, sorted.
    pub fn label_set(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self
            .planted_rules
            .iter()
            .map(|r| r.label.as_str())
            .chain(std::iter::once(self.default_label.as_str()))
            .collect();
        set.into_iter().map(str::to_string).collect()
    }

    pub fn keyword_rate_mut(&mut self, word: &str) -> Option<&mut f64> {
        self.keywords.iter_mut().find(|k| k.word == word).map(|k| &mut k.doc_rate)
    }
}

fn is_filler(word: &str) -> bool {
    word.strip_prefix('w').is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

/// Generates the corpus described by `spec`; the planted rules are the ground truth.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(SyntheticCorpus, Vec<PlantedRule>)> {
    spec.validate()?;
    let zipf = Zipf::new(spec.vocabulary_size as f64, spec.zipf_exponent)
        .map_err(|e| Error::InvalidSpec(format!("zipf: {e}")))?;
    let mut filler_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut keyword_rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x6b65_7977_6f72_6473);
    let mut label_rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x6c61_6265_6c73_0000);
    let labels = spec.label_set();

    let mut corpus = SyntheticCorpus {
        docs: Vec::with_capacity(spec.document_count),
        labels: Vec::with_capacity(spec.document_count),
        clean_labels: Vec::with_capacity(spec.document_count),
        flipped: Vec::with_capacity(spec.document_count),
    };
    for _ in 0..spec.document_count {
        let len = filler_rng.random_range(spec.min_doc_length..=spec.max_doc_length);
        let mut tokens: Vec<String> =
            (0..len).map(|_| format!("w{}", zipf.sample(&mut filler_rng) as usize - 1)).collect();
        let mut present = BTreeSet::new();
        for k in &spec.keywords {
            let hit = keyword_rng.random::<f64>() < k.doc_rate;
            let pos = keyword_rng.random_range(0..=tokens.len());
            if hit {
                tokens.insert(pos, k.word.clone());
                present.insert(k.word.as_str());
            }
        }
        let clean = spec
            .planted_rules
            .iter()
            .find(|r| r.holds(&present))
            .map_or(spec.default_label.as_str(), |r| r.label.as_str())
            .to_string();
        let flip = label_rng.random::<f64>() < spec.label_noise_rate;
        let others: Vec<&String> = labels.iter().filter(|l| **l != clean).collect();
        let pick = label_rng.random_range(0..others.len().max(1));
        let label = if flip { others[pick].clone() } else { clean.clone() };
        corpus.docs.push(tokens.join(" "));
        corpus.flipped.push(flip);
        corpus.labels.push(label);
        corpus.clean_labels.push(clean);
    }
    Ok((corpus, spec.planted_rules.clone()))
}

/// Adjusts the document rate of `word` until its vocabulary rank falls in `ranks`
/// (a `[lo, hi]` range over 0-based ranks, with `hi` measured against the resulting vocabulary
/// size via `bounds(v)`). Bisects on the rate; rank falls as the rate rises.
pub fn shape_keyword_rank(
    spec: &SyntheticSpec,
    word: &str,
    min_df: usize,
    ngram_range: NgramRange,
    bounds: impl Fn(usize) -> (usize, usize),
) -> Result<(SyntheticSpec, usize, Vocabulary)> {
    let mut spec = spec.clone();
    if spec.keyword_rate_mut(word).is_none() {
        return Err(Error::InvalidSpec(format!("unknown keyword {word:?}")));
    }
    let (mut lo_rate, mut hi_rate) = (0.0f64, 1.0f64);
    for _ in 0..40 {
        let rate = (lo_rate + hi_rate) / 2.0;
        *spec.keyword_rate_mut(word).expect("checked above") = rate;
        let (corpus, _) = generate_synthetic(&spec)?;
        let vocab = Vocabulary::build(&corpus.docs, min_df, ngram_range)?;
        let (lo, hi) = bounds(vocab.len());
        match vocab.rank_of(word) {
            Some(rank) if rank >= lo && rank <= hi => return Ok((spec, rank, vocab)),
            Some(rank) if rank < lo => hi_rate = rate,
            _ => lo_rate = rate,
        }
    }
    Err(Error::InvalidSpec(format!("could not place {word:?} in the requested rank range")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha_spec(noise: f64) -> SyntheticSpec {
        SyntheticSpec {
            keywords: vec![KeywordSpec { word: "alpha".into(), doc_rate: 0.3 }],
            planted_rules: vec![PlantedRule { label: "pos".into(), present: vec!["alpha".into()], absent: vec![] }],
            label_noise_rate: noise,
            ..SyntheticSpec::default()
        }
    }

    #[test]
    fn noiseless_labels_follow_rule() {
        let (c, truth) = generate_synthetic(&alpha_spec(0.0)).unwrap();
        assert_eq!(truth.len(), 1);
        for (doc, label) in c.docs.iter().zip(&c.labels) {
            let has = doc.split(' ').any(|t| t == "alpha");
            assert_eq!(label == "pos", has);
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let a = generate_synthetic(&alpha_spec(0.1)).unwrap();
        let b = generate_synthetic(&alpha_spec(0.1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn keyword_rate_does_not_move_filler() {
        let mut s = alpha_spec(0.0);
        let (a, _) = generate_synthetic(&s).unwrap();
        *s.keyword_rate_mut("alpha").unwrap() = 0.9;
        let (b, _) = generate_synthetic(&s).unwrap();
        let strip = |d: &String| d.split(' ').filter(|t| *t != "alpha").collect::<Vec<_>>().join(" ");
        assert!(a.docs.iter().zip(&b.docs).all(|(x, y)| strip(x) == strip(y)));
    }

    #[test]
    fn invalid_specs() {
        let mut s = alpha_spec(0.5);
        assert!(matches!(generate_synthetic(&s), Err(Error::InvalidSpec(_))));
        s.label_noise_rate = 0.0;
        s.planted_rules[0].present = vec!["beta".into()];
        assert!(s.validate().is_err());
        s.planted_rules[0].present = vec!["alpha".into()];
        s.keywords[0].word = "w12".into();
        assert!(s.validate().is_err());
    }
}
