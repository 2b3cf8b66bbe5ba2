//! Examples, schemas, and index-based dataset views.
//!
//! A [`Dataset`] owns the examples once. Everything the learners touch is a [`View`]: a list
//! of row indices plus a feature limit. Restricting a view to the first `k` vocabulary ranks
//! copies nothing; text examples keep their ranks sorted, so the restricted feature set of a
//! row is a prefix slice of its stored ranks.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::vocab::{Fnv, Vocabulary};

pub type LabelId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Text,
    Tabular,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Text => "text",
            Mode::Tabular => "tabular",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    /// Index into the attribute's declared symbols.
    Nominal(u32),
    Numeric(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Features {
    /// Sorted, deduplicated vocabulary ranks.
    Text(Vec<u32>),
    /// One value per schema attribute.
    Tabular(Vec<Value>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub id: String,
    pub features: Features,
    pub label: LabelId,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AttributeKind {
    Nominal(Vec<String>),
    Numeric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TabularSchema {
    pub attributes: Vec<Attribute>,
}

impl TabularSchema {
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv::new();
        h.write(b"tabular");
        for a in &self.attributes {
            h.write(a.name.as_bytes());
            h.write(&[0]);
            match &a.kind {
                AttributeKind::Numeric => h.write(b"#num"),
                AttributeKind::Nominal(values) => {
                    for v in values {
                        h.write(v.as_bytes());
                        h.write(&[1]);
                    }
                }
            }
            h.write(&[2]);
        }
        h.finish()
    }

    /// Builds a schema and value rows from string cells. A column is numeric when every cell
    /// parses as a finite float; otherwise it is nominal with symbols in first-seen order.
    pub fn infer(names: &[String], rows: &[Vec<String>]) -> Result<(Self, Vec<Vec<Value>>)> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != names.len() {
                return Err(Error::SchemaMismatch(format!(
                    "row {i} has {} attribute cells, expected {}",
                    row.len(),
                    names.len()
                )));
            }
        }
        let mut attributes = Vec::with_capacity(names.len());
        let mut values = vec![Vec::with_capacity(names.len()); rows.len()];
        for (col, name) in names.iter().enumerate() {
            let numeric: Option<Vec<f64>> =
                rows.iter().map(|r| r[col].trim().parse::<f64>().ok().filter(|x| x.is_finite())).collect();
            match numeric {
                Some(xs) if !rows.is_empty() => {
                    for (dst, x) in values.iter_mut().zip(xs) {
                        dst.push(Value::Numeric(x));
                    }
                    attributes.push(Attribute { name: name.clone(), kind: AttributeKind::Numeric });
                }
                _ => {
                    let mut symbols: Vec<String> = Vec::new();
                    let mut lookup: HashMap<&str, u32> = HashMap::new();
                    for (dst, r) in values.iter_mut().zip(rows) {
                        let cell = r[col].trim();
                        let id = *lookup.entry(cell).or_insert_with(|| {
                            symbols.push(cell.to_string());
                            (symbols.len() - 1) as u32
                        });
                        dst.push(Value::Nominal(id));
                    }
                    attributes.push(Attribute { name: name.clone(), kind: AttributeKind::Nominal(symbols) });
                }
            }
        }
        Ok((TabularSchema { attributes }, values))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Schema {
    Text(Vocabulary),
    Tabular(TabularSchema),
}

impl Schema {
    pub fn mode(&self) -> Mode {
        match self {
            Schema::Text(_) => Mode::Text,
            Schema::Tabular(_) => Mode::Tabular,
        }
    }

    /// Number of attributes: vocabulary size in text mode.
    pub fn width(&self) -> usize {
        match self {
            Schema::Text(v) => v.len(),
            Schema::Tabular(t) => t.attributes.len(),
        }
    }

    pub fn fingerprint(&self) -> u64 {
        match self {
            Schema::Text(v) => v.fingerprint(),
            Schema::Tabular(t) => t.fingerprint(),
        }
    }

    pub fn attribute_name(&self, index: usize) -> Option<&str> {
        match self {
            Schema::Text(v) => v.gram(index),
            Schema::Tabular(t) => t.attributes.get(index).map(|a| a.name.as_str()),
        }
    }

    pub fn nominal_symbols(&self, index: usize) -> Option<&[String]> {
        match self {
            Schema::Text(_) => None,
            Schema::Tabular(t) => match &t.attributes.get(index)?.kind {
                AttributeKind::Nominal(values) => Some(values),
                AttributeKind::Numeric => None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    examples: Vec<Example>,
    schema: Schema,
    labels: Vec<String>,
}

/// Sorted label list and per-row label ids.
fn intern_labels<L: AsRef<str>>(labels: &[L]) -> (Vec<String>, Vec<LabelId>) {
    let set: BTreeMap<&str, ()> = labels.iter().map(|l| (l.as_ref(), ())).collect();
    let names: Vec<String> = set.keys().map(|s| s.to_string()).collect();
    let ids =
        labels.iter().map(|l| names.binary_search_by(|n| n.as_str().cmp(l.as_ref())).unwrap() as LabelId).collect();
    (names, ids)
}

impl Dataset {
    /// Vectorizes `docs` against `vocabulary` into binary presence rows.
    pub fn from_text<S: AsRef<str>, L: AsRef<str>>(docs: &[S], labels: &[L], vocabulary: Vocabulary) -> Result<Self> {
        if docs.len() != labels.len() {
            return Err(Error::SchemaMismatch(format!("{} documents but {} labels", docs.len(), labels.len())));
        }
        let (label_names, ids) = intern_labels(labels);
        let examples = docs
            .iter()
            .zip(ids)
            .enumerate()
            .map(|(i, (doc, label))| Example {
                id: i.to_string(),
                features: Features::Text(vocabulary.present_ranks(doc.as_ref())),
                label,
            })
            .collect();
        Self::new(examples, Schema::Text(vocabulary), label_names)
    }

    pub fn from_tabular<L: AsRef<str>>(schema: TabularSchema, rows: Vec<Vec<Value>>, labels: &[L]) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::SchemaMismatch(format!("{} rows but {} labels", rows.len(), labels.len())));
        }
        let (label_names, ids) = intern_labels(labels);
        let examples = rows
            .into_iter()
            .zip(ids)
            .enumerate()
            .map(|(i, (values, label))| Example { id: i.to_string(), features: Features::Tabular(values), label })
            .collect();
        Self::new(examples, Schema::Tabular(schema), label_names)
    }

    /// Assembles a dataset and checks every example against the schema.
    pub fn new(examples: Vec<Example>, schema: Schema, labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InsufficientData("dataset has no labels".into()));
        }
        let width = schema.width();
        for ex in &examples {
            if ex.label as usize >= labels.len() {
                return Err(Error::SchemaMismatch(format!("example {} has unknown label id", ex.id)));
            }
            match (&ex.features, &schema) {
                (Features::Text(ranks), Schema::Text(_)) => {
                    if ranks.windows(2).any(|w| w[0] >= w[1]) || ranks.last().is_some_and(|&r| r as usize >= width) {
                        return Err(Error::SchemaMismatch(format!("example {} has invalid ranks", ex.id)));
                    }
                }
                (Features::Tabular(values), Schema::Tabular(t)) => {
                    if values.len() != width {
                        return Err(Error::SchemaMismatch(format!("example {} has {} values", ex.id, values.len())));
                    }
                    for (v, a) in values.iter().zip(&t.attributes) {
                        let ok = match (v, &a.kind) {
                            (Value::Numeric(_), AttributeKind::Numeric) => true,
                            (Value::Nominal(s), AttributeKind::Nominal(symbols)) => (*s as usize) < symbols.len(),
                            _ => false,
                        };
                        if !ok {
                            return Err(Error::SchemaMismatch(format!(
                                "example {} has a bad value for {}",
                                ex.id, a.name
                            )));
                        }
                    }
                }
                _ => return Err(Error::SchemaMismatch(format!("example {} does not match dataset mode", ex.id))),
            }
        }
        Ok(Dataset { examples, schema, labels })
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn mode(&self) -> Mode {
        self.schema.mode()
    }

    pub fn vocabulary(&self) -> Option<&Vocabulary> {
        match &self.schema {
            Schema::Text(v) => Some(v),
            Schema::Tabular(_) => None,
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_id(&self, label: &str) -> Result<LabelId> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| i as LabelId)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn label_name(&self, id: LabelId) -> &str {
        &self.labels[id as usize]
    }

    pub fn label_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.labels.len()];
        for ex in &self.examples {
            counts[ex.label as usize] += 1;
        }
        counts
    }

    /// View over every example with the full feature space.
    pub fn view(&self) -> View<'_> {
        View { data: self, rows: (0..self.examples.len() as u32).collect(), limit: self.schema.width() }
    }

    /// View over `rows` with the full feature space.
    pub fn select(&self, rows: Vec<u32>) -> View<'_> {
        debug_assert!(rows.iter().all(|&r| (r as usize) < self.examples.len()));
        View { data: self, rows, limit: self.schema.width() }
    }

    /// View over every example seeing only the first `k` vocabulary ranks.
    pub fn restrict(&self, k: usize) -> Result<View<'_>> {
        self.view().restrict(k)
    }
}

/// Row subset of a [`Dataset`] seeing only feature ranks below `limit`.
#[derive(Debug, Clone)]
pub struct View<'a> {
    data: &'a Dataset,
    rows: Vec<u32>,
    limit: usize,
}

impl<'a> View<'a> {
    pub fn dataset(&self) -> &'a Dataset {
        self.data
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<u32> {
        self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Number of visible attributes (the dictionary size in text mode).
    pub fn feature_space(&self) -> usize {
        self.limit
    }

    pub fn mode(&self) -> Mode {
        self.data.mode()
    }

    pub fn example(&self, row: u32) -> &'a Example {
        &self.data.examples[row as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = &'a Example> + '_ {
        self.rows.iter().map(|&r| &self.data.examples[r as usize])
    }

    /// Restricts the feature space to ranks `< k`. Only valid in text mode and for
    /// `1 <= k <= feature_space()`.
    pub fn restrict(&self, k: usize) -> Result<View<'a>> {
        if self.mode() != Mode::Text || k == 0 || k > self.limit {
            return Err(Error::InvalidRestriction {
                requested: k,
                available: if self.mode() == Mode::Text { self.limit } else { 0 },
            });
        }
        Ok(View { data: self.data, rows: self.rows.clone(), limit: k })
    }

    /// Same feature space, different rows.
    pub fn with_rows(&self, rows: Vec<u32>) -> View<'a> {
        View { data: self.data, rows, limit: self.limit }
    }

    /// Ranks of `row` visible in this view (empty in tabular mode).
    pub fn present(&self, row: u32) -> &'a [u32] {
        visible_ranks(self.example(row), self.limit)
    }

    pub fn label_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.data.labels.len()];
        for ex in self.iter() {
            counts[ex.label as usize] += 1;
        }
        counts
    }

    /// Splits rows into (target label, other labels), preserving order.
    pub fn partition_by_label(&self, target: LabelId) -> (Vec<u32>, Vec<u32>) {
        self.rows.iter().partition(|&&r| self.data.examples[r as usize].label == target)
    }
}

/// Prefix of the example's sorted ranks lying below `limit`.
pub(crate) fn visible_ranks(ex: &Example, limit: usize) -> &[u32] {
    match &ex.features {
        Features::Text(ranks) => &ranks[..ranks.partition_point(|&r| (r as usize) < limit)],
        Features::Tabular(_) => &[],
    }
}
