use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no n-gram reaches the minimum document frequency of {min_df}")]
    EmptyVocabulary { min_df: usize },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("invalid restriction to {requested} features (feature space holds {available})")]
    InvalidRestriction { requested: usize, available: usize },

    #[error("invalid rule: {0}")]
    InvalidRule(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("no literal with positive gain for label {label:?}")]
    NoRuleFound { label: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid synthetic corpus spec: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, column, message: message.into() }
    }
}
