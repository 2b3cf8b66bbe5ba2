//! Sequential-covering rule learners (FOIL and RIPPER) wrapped in a confidence-gated
//! iterative procedure: every rule is scored by its validation precision, and rules that fall
//! short trigger a larger dictionary and the reinjection of their false positives before
//! relearning.
//!
//! The crate is organized bottom-up:
//!
//! - [`text`] and [`vocab`] turn raw documents into a frequency-ordered n-gram vocabulary.
//! - [`dataset`] holds examples and cheap row/feature views over them.
//! - [`rule`] and [`format`] define rules, prediction with abstention, and the rule-set file.
//! - [`learn`] implements the base learners.
//! - [`iterative`] implements the confidence-gated loop.
//! - [`eval`] splits data, sweeps thresholds, compares runs and generates synthetic corpora.
//!
//! Data-parallel inner loops run on rayon when the `parallel` feature is on (the default) and
//! [`Execution::Parallel`] is selected; results are identical either way.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod exec;
pub mod format;
pub mod io;
pub mod iterative;
pub mod learn;
pub mod rule;
pub mod text;
pub mod vocab;

pub use dataset::{Dataset, Example, Features, LabelId, Mode, Schema, View};
pub use error::{Error, Result};
pub use eval::PeakAlloc;
pub use exec::Execution;
pub use iterative::{
    learn_confident_rule, learn_multiclass, learn_ruleset_iterative, value_of_confidence, Decision, IterationConfig,
    IterationRecord, IterationTrace,
};
pub use learn::{learn_baseline, learn_one_rule, LearnerKind, LearnerOptions};
pub use rule::{coverage, Condition, Coverage, Rule, RuleSet, ScoredRule, Test};
pub use text::tokenize;
pub use vocab::{NgramRange, Vocabulary};
