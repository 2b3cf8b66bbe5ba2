//! Conjunctive rules, coverage, and confidence-filtered prediction.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::Serialize;

use crate::dataset::{Dataset, Example, Features, LabelId, Mode, Schema, Value, View};
use crate::error::{Error, Result};

/// The comparison a condition applies to one attribute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Test {
    /// Text feature occurs in the document.
    Present,
    /// Text feature does not occur in the document.
    Absent,
    /// Nominal attribute takes the given symbol index.
    Equals(u32),
    LessEqual(f64),
    GreaterEqual(f64),
}

impl Test {
    /// Position in the tie-breaking order present < absent < equals < less-equal < greater-equal.
    pub fn order(&self) -> u8 {
        match self {
            Test::Present => 0,
            Test::Absent => 1,
            Test::Equals(_) => 2,
            Test::LessEqual(_) => 3,
            Test::GreaterEqual(_) => 4,
        }
    }

    fn value_key(&self) -> f64 {
        match *self {
            Test::Equals(v) => f64::from(v),
            Test::LessEqual(x) | Test::GreaterEqual(x) => x,
            Test::Present | Test::Absent => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Condition {
    /// Vocabulary rank in text mode, attribute index in tabular mode.
    pub attribute: usize,
    pub test: Test,
}

impl Condition {
    pub fn present(rank: usize) -> Self {
        Condition { attribute: rank, test: Test::Present }
    }

    pub fn absent(rank: usize) -> Self {
        Condition { attribute: rank, test: Test::Absent }
    }

    pub fn equals(attribute: usize, symbol: u32) -> Self {
        Condition { attribute, test: Test::Equals(symbol) }
    }

    pub fn less_equal(attribute: usize, x: f64) -> Self {
        Condition { attribute, test: Test::LessEqual(x) }
    }

    pub fn greater_equal(attribute: usize, x: f64) -> Self {
        Condition { attribute, test: Test::GreaterEqual(x) }
    }

    /// Deterministic candidate order: attribute, then operator, then value.
    pub fn tie_order(&self, other: &Condition) -> Ordering {
        self.attribute
            .cmp(&other.attribute)
            .then(self.test.order().cmp(&other.test.order()))
            .then(self.test.value_key().total_cmp(&other.test.value_key()))
    }

    /// Evaluates the condition seeing only text ranks below `limit`.
    pub fn eval(&self, ex: &Example, limit: usize) -> Result<bool> {
        match (&ex.features, self.test) {
            (Features::Text(ranks), Test::Present) => Ok(self.attribute < limit && contains(ranks, self.attribute)),
            (Features::Text(ranks), Test::Absent) => Ok(!(self.attribute < limit && contains(ranks, self.attribute))),
            (Features::Tabular(values), test) => {
                let value = values.get(self.attribute).ok_or_else(|| {
                    Error::SchemaMismatch(format!("example {} has no attribute {}", ex.id, self.attribute))
                })?;
                match (test, value) {
                    (Test::Equals(s), Value::Nominal(v)) => Ok(*v == s),
                    (Test::LessEqual(x), Value::Numeric(v)) => Ok(*v <= x),
                    (Test::GreaterEqual(x), Value::Numeric(v)) => Ok(*v >= x),
                    _ => Err(Error::SchemaMismatch(format!(
                        "condition {:?} does not apply to attribute {} of example {}",
                        test, self.attribute, ex.id
                    ))),
                }
            }
            (Features::Text(_), test) => {
                Err(Error::SchemaMismatch(format!("condition {test:?} cannot apply to a text example")))
            }
        }
    }

    /// Schema-agnostic evaluation for learner inner loops; mismatches count as false.
    pub(crate) fn holds(&self, ex: &Example, limit: usize) -> bool {
        self.eval(ex, limit).unwrap_or(false)
    }

    fn contradicts(&self, other: &Condition) -> bool {
        if self.attribute != other.attribute {
            return false;
        }
        match (self.test, other.test) {
            (Test::Present, Test::Absent) | (Test::Absent, Test::Present) => true,
            (Test::Equals(a), Test::Equals(b)) => a != b,
            (Test::LessEqual(hi), Test::GreaterEqual(lo)) | (Test::GreaterEqual(lo), Test::LessEqual(hi)) => lo > hi,
            _ => false,
        }
    }
}

fn contains(ranks: &[u32], rank: usize) -> bool {
    u32::try_from(rank).is_ok_and(|r| ranks.binary_search(&r).is_ok())
}

/// A non-empty conjunction of conditions predicting `label`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rule {
    pub label: String,
    pub conditions: Vec<Condition>,
}

impl Rule {
    pub fn new(label: impl Into<String>, conditions: Vec<Condition>) -> Result<Self> {
        if conditions.is_empty() {
            return Err(Error::InvalidRule("a rule needs at least one condition".into()));
        }
        for (i, a) in conditions.iter().enumerate() {
            if conditions[i + 1..].iter().any(|b| a.contradicts(b)) {
                return Err(Error::InvalidRule(format!("contradictory conditions on attribute {}", a.attribute)));
            }
        }
        Ok(Rule { label: label.into(), conditions })
    }

    /// True iff every condition holds.
    pub fn matches(&self, ex: &Example) -> Result<bool> {
        self.matches_limited(ex, usize::MAX)
    }

    /// As [`Rule::matches`], seeing only text ranks below `limit`.
    pub fn matches_limited(&self, ex: &Example, limit: usize) -> Result<bool> {
        for c in &self.conditions {
            if !c.eval(ex, limit)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub(crate) fn holds(&self, ex: &Example, limit: usize) -> bool {
        self.conditions.iter().all(|c| c.holds(ex, limit))
    }

    /// Rows of `view` the rule matches.
    pub fn covered_rows(&self, view: &View<'_>) -> Vec<u32> {
        let limit = view.feature_space();
        view.rows().iter().copied().filter(|&r| self.holds(view.example(r), limit)).collect()
    }

    pub fn render(&self, names: &dyn AttributeNames, target_name: &str) -> String {
        render(self, names, target_name)
    }
}

/// Covered examples split by label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Coverage {
    /// Covered examples carrying the target label.
    pub positives: usize,
    /// Covered examples carrying any other label.
    pub negatives: usize,
}

impl Coverage {
    pub fn total(&self) -> usize {
        self.positives + self.negatives
    }
}

impl std::ops::Add for Coverage {
    type Output = Coverage;

    fn add(self, rhs: Coverage) -> Coverage {
        Coverage { positives: self.positives + rhs.positives, negatives: self.negatives + rhs.negatives }
    }
}

/// Counts the examples of `view` matched by `rule`, by target / non-target label.
pub fn coverage(rule: &Rule, view: &View<'_>, target: LabelId) -> Result<Coverage> {
    let limit = view.feature_space();
    let mut cov = Coverage::default();
    for ex in view.iter() {
        if rule.matches_limited(ex, limit)? {
            if ex.label == target {
                cov.positives += 1;
            } else {
                cov.negatives += 1;
            }
        }
    }
    Ok(cov)
}

/// Maps attribute indices (and nominal symbol ids) to display names.
pub trait AttributeNames {
    fn attribute_name(&self, attribute: usize) -> Option<&str>;
    fn symbol(&self, attribute: usize, symbol: u32) -> Option<&str>;
}

impl AttributeNames for Schema {
    fn attribute_name(&self, attribute: usize) -> Option<&str> {
        Schema::attribute_name(self, attribute)
    }

    fn symbol(&self, attribute: usize, symbol: u32) -> Option<&str> {
        self.nominal_symbols(attribute)?.get(symbol as usize).map(String::as_str)
    }
}

impl AttributeNames for crate::vocab::Vocabulary {
    fn attribute_name(&self, attribute: usize) -> Option<&str> {
        self.gram(attribute)
    }

    fn symbol(&self, _attribute: usize, _symbol: u32) -> Option<&str> {
        None
    }
}

fn fmt_number(x: f64) -> String {
    format!("{x}")
}

/// `IF <attr> = <1|0|value> AND ... THEN <target> = <label>`.
pub fn render(rule: &Rule, names: &dyn AttributeNames, target_name: &str) -> String {
    let mut out = String::from("IF ");
    for (i, c) in rule.conditions.iter().enumerate() {
        if i > 0 {
            out.push_str(" AND ");
        }
        let name = names.attribute_name(c.attribute).map(str::to_string).unwrap_or_else(|| format!("#{}", c.attribute));
        let clause = match c.test {
            Test::Present => format!("{name} = 1"),
            Test::Absent => format!("{name} = 0"),
            Test::Equals(s) => match names.symbol(c.attribute, s) {
                Some(sym) => format!("{name} = {sym}"),
                None => format!("{name} = #{s}"),
            },
            Test::LessEqual(x) => format!("{name} <= {}", fmt_number(x)),
            Test::GreaterEqual(x) => format!("{name} >= {}", fmt_number(x)),
        };
        out.push_str(&clause);
    }
    out.push_str(" THEN ");
    out.push_str(target_name);
    out.push_str(" = ");
    out.push_str(&rule.label);
    out
}

/// A rule with its validation confidence and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredRule {
    pub rule: Rule,
    /// Validation precision p / (p + n), in `[0, 1]`.
    pub voc: f64,
    /// Whether the rule cleared the confidence threshold (false: final-iteration fallback).
    pub accepted: bool,
    /// 1-based iteration the rule was produced in; 0 for rules learned without the iterative loop.
    pub iteration: usize,
    /// Dictionary size the rule was learned with (text mode only).
    pub dictionary_size: Option<usize>,
}

/// Display data for one attribute referenced by a rule set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeInfo {
    pub name: String,
    /// Declared symbols for nominal attributes.
    pub symbols: Option<Vec<String>>,
}

/// Names of the attributes a rule set references, so it can be rendered without its schema.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AttributeTable(pub BTreeMap<usize, AttributeInfo>);

impl AttributeNames for AttributeTable {
    fn attribute_name(&self, attribute: usize) -> Option<&str> {
        self.0.get(&attribute).map(|a| a.name.as_str())
    }

    fn symbol(&self, attribute: usize, symbol: u32) -> Option<&str> {
        self.0.get(&attribute)?.symbols.as_ref()?.get(symbol as usize).map(String::as_str)
    }
}

/// Ordered rules, highest confidence first; ties keep learning order.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet {
    pub(crate) rules: Vec<ScoredRule>,
    pub(crate) labels: Vec<String>,
    pub(crate) mode: Mode,
    pub(crate) schema_fingerprint: u64,
    pub(crate) target_name: String,
    pub(crate) attributes: AttributeTable,
}

impl RuleSet {
    /// Binds `rules` (in learning order) to `schema`, validating every condition.
    pub fn new(rules: Vec<ScoredRule>, schema: &Schema, labels: Vec<String>) -> Result<Self> {
        let mut table = BTreeMap::new();
        for sr in &rules {
            if !(0.0..=1.0).contains(&sr.voc) {
                return Err(Error::InvalidRule(format!("voc {} outside [0, 1]", sr.voc)));
            }
            if !labels.contains(&sr.rule.label) {
                return Err(Error::UnknownLabel(sr.rule.label.clone()));
            }
            for c in &sr.rule.conditions {
                check_condition(c, schema)?;
                table.entry(c.attribute).or_insert_with(|| AttributeInfo {
                    name: schema.attribute_name(c.attribute).unwrap_or_default().to_string(),
                    symbols: schema.nominal_symbols(c.attribute).map(<[String]>::to_vec),
                });
            }
        }
        Ok(Self::from_parts(
            rules,
            labels,
            schema.mode(),
            schema.fingerprint(),
            "Type".to_string(),
            AttributeTable(table),
        ))
    }

    pub(crate) fn from_parts(
        mut rules: Vec<ScoredRule>,
        labels: Vec<String>,
        mode: Mode,
        schema_fingerprint: u64,
        target_name: String,
        attributes: AttributeTable,
    ) -> Self {
        rules.sort_by(|a, b| b.voc.total_cmp(&a.voc));
        RuleSet { rules, labels, mode, schema_fingerprint, target_name, attributes }
    }

    /// Name used on the right-hand side of rendered rules (defaults to `Type`).
    pub fn with_target_name(mut self, name: impl Into<String>) -> Self {
        self.target_name = name.into();
        self
    }

    pub fn rules(&self) -> &[ScoredRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn schema_fingerprint(&self) -> u64 {
        self.schema_fingerprint
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn attributes(&self) -> &AttributeTable {
        &self.attributes
    }

    pub fn check_schema(&self, dataset: &Dataset) -> Result<()> {
        if dataset.schema().fingerprint() != self.schema_fingerprint {
            return Err(Error::SchemaMismatch(format!(
                "rule set is bound to schema {:016x}, dataset has {:016x}",
                self.schema_fingerprint,
                dataset.schema().fingerprint()
            )));
        }
        Ok(())
    }

    /// Label of the first rule with `voc > voc_threshold` that fully matches `ex`, or `None`
    /// (abstain) when no such rule fires.
    pub fn predict(&self, ex: &Example, voc_threshold: f64) -> Result<Option<&str>> {
        for sr in self.rules.iter().filter(|r| r.voc > voc_threshold) {
            if sr.rule.matches(ex)? {
                return Ok(Some(sr.rule.label.as_str()));
            }
        }
        Ok(None)
    }

    /// Prediction using every rule regardless of confidence.
    pub fn predict_any(&self, ex: &Example) -> Result<Option<&str>> {
        self.predict(ex, f64::NEG_INFINITY)
    }

    /// Rendered rules with `voc > min_voc`, in rule-set order.
    pub fn render(&self, min_voc: f64) -> Vec<String> {
        self.rules
            .iter()
            .filter(|r| r.voc > min_voc)
            .map(|r| render(&r.rule, &self.attributes, &self.target_name))
            .collect()
    }
}

fn check_condition(c: &Condition, schema: &Schema) -> Result<()> {
    let ok = match (schema, c.test) {
        (Schema::Text(v), Test::Present | Test::Absent) => c.attribute < v.len(),
        (Schema::Tabular(_), Test::Equals(s)) => {
            schema.nominal_symbols(c.attribute).is_some_and(|syms| (s as usize) < syms.len())
        }
        (Schema::Tabular(t), Test::LessEqual(_) | Test::GreaterEqual(_)) => {
            t.attributes.get(c.attribute).is_some_and(|a| a.kind == crate::dataset::AttributeKind::Numeric)
        }
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::SchemaMismatch(format!(
            "condition {:?} on attribute {} does not fit the schema",
            c.test, c.attribute
        )))
    }
}
