//! Document-frequency ordered n-gram vocabulary.
//!
//! Features are sorted most-frequent-first (ascending inverse document frequency), ties broken
//! lexicographically on the gram text. A prefix of the vocabulary is a "dictionary": the first
//! `k` ranks are the `k` most common grams.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::text::{ngrams, tokenize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NgramRange {
    pub min: usize,
    pub max: usize,
}

impl Default for NgramRange {
    fn default() -> Self {
        NgramRange { min: 1, max: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feature {
    pub gram: String,
    pub document_frequency: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    features: Vec<Feature>,
    index: HashMap<String, u32>,
    corpus_size: usize,
    min_df: usize,
    ngram_range: NgramRange,
}

impl Vocabulary {
    /// Builds the vocabulary of all grams appearing in at least `min_df` documents.
    pub fn build<S: AsRef<str>>(corpus: &[S], min_df: usize, ngram_range: NgramRange) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let min_df = min_df.max(1);
        let mut df: HashMap<String, usize> = HashMap::new();
        for doc in corpus {
            let grams: HashSet<String> =
                ngrams(&tokenize(doc.as_ref()), ngram_range.min, ngram_range.max).into_iter().collect();
            for g in grams {
                *df.entry(g).or_insert(0) += 1;
            }
        }
        let mut features: Vec<Feature> = df
            .into_iter()
            .filter(|(_, d)| *d >= min_df)
            .map(|(gram, document_frequency)| Feature { gram, document_frequency })
            .collect();
        if features.is_empty() {
            return Err(Error::EmptyVocabulary { min_df });
        }
        features.sort_by(|a, b| b.document_frequency.cmp(&a.document_frequency).then_with(|| a.gram.cmp(&b.gram)));
        Ok(Self::from_features(features, corpus.len(), min_df, ngram_range))
    }

    fn from_features(features: Vec<Feature>, corpus_size: usize, min_df: usize, ngram_range: NgramRange) -> Self {
        let index = features.iter().enumerate().map(|(rank, f)| (f.gram.clone(), rank as u32)).collect();
        Vocabulary { features, index, corpus_size, min_df, ngram_range }
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn feature(&self, rank: usize) -> Option<&Feature> {
        self.features.get(rank)
    }

    pub fn gram(&self, rank: usize) -> Option<&str> {
        self.features.get(rank).map(|f| f.gram.as_str())
    }

    pub fn rank_of(&self, gram: &str) -> Option<usize> {
        self.index.get(gram).map(|&r| r as usize)
    }

    pub fn corpus_size(&self) -> usize {
        self.corpus_size
    }

    pub fn min_df(&self) -> usize {
        self.min_df
    }

    pub fn ngram_range(&self) -> NgramRange {
        self.ngram_range
    }

    /// Sorted, deduplicated ranks of the vocabulary grams occurring in `doc`.
    pub fn present_ranks(&self, doc: &str) -> Vec<u32> {
        let mut ranks: Vec<u32> = ngrams(&tokenize(doc), self.ngram_range.min, self.ngram_range.max)
            .iter()
            .filter_map(|g| self.index.get(g).copied())
            .collect();
        ranks.sort_unstable();
        ranks.dedup();
        ranks
    }

    /// Stable 64-bit FNV-1a fingerprint over the ordered grams.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv::new();
        h.write(b"text");
        for f in &self.features {
            h.write(f.gram.as_bytes());
            h.write(&[0]);
        }
        h.finish()
    }

    /// Writes one `rank<TAB>gram<TAB>df` line per feature.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut buf = String::new();
        for (rank, f) in self.features.iter().enumerate() {
            buf.clear();
            let _ = writeln!(buf, "{rank}\t{}\t{}", f.gram, f.document_frequency);
            out.write_all(buf.as_bytes())?;
        }
        Ok(())
    }

    /// Reads a dump written by [`Vocabulary::write_tsv`].
    pub fn read_tsv<R: BufRead>(input: R, corpus_size: usize, min_df: usize, ngram_range: NgramRange) -> Result<Self> {
        let mut features = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split('\t');
            let (Some(rank), Some(gram), Some(df), None) = (cols.next(), cols.next(), cols.next(), cols.next()) else {
                return Err(Error::parse(i + 1, 1, "expected rank<TAB>gram<TAB>df"));
            };
            if rank.parse::<usize>().ok() != Some(features.len()) {
                return Err(Error::parse(i + 1, 1, format!("expected rank {}", features.len())));
            }
            let document_frequency =
                df.parse().map_err(|_| Error::parse(i + 1, rank.len() + gram.len() + 3, "bad document frequency"))?;
            if let Some(prev) = features.last() {
                let prev: &Feature = prev;
                let ordered = prev.document_frequency > document_frequency
                    || (prev.document_frequency == document_frequency && prev.gram.as_str() < gram);
                if !ordered {
                    return Err(Error::parse(i + 1, rank.len() + 2, format!("{gram:?} out of order")));
                }
            }
            features.push(Feature { gram: gram.to_string(), document_frequency });
        }
        let vocab = Self::from_features(features, corpus_size, min_df, ngram_range);
        if vocab.index.len() != vocab.features.len() {
            return Err(Error::parse(0, 0, "duplicate gram in vocabulary dump"));
        }
        Ok(vocab)
    }
}

/// 64-bit FNV-1a. Used for fingerprints that must be stable across platforms and releases.
#[derive(Debug, Clone)]
pub(crate) struct Fnv(u64);

impl Fnv {
    pub(crate) fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    pub(crate) fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 ^= u64::from(*b);
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    pub(crate) fn finish(&self) -> u64 {
        self.0
    }
}
