//! Run configuration: one TOML file per experiment.
//!
//! ```toml
//! [dataset]
//! path = "data/tweets.csv"      # relative to the config file
//! mode = "text"                 # or "tabular"
//! text_column = "tweet"
//! label_column = "class"
//!
//! [pipeline]
//! min_df = 5
//!
//! [learner]
//! kind = "foil"                 # or "ripper"
//!
//! [iteration]
//! voc_threshold = 0.9
//!
//! [output]
//! directory = "runs/tweets-foil"
//! ```
//!
//! Every block except `[dataset]` is optional. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use confrule::eval::{SplitSpec, DEFAULT_THRESHOLDS};
use confrule::{IterationConfig, LearnerOptions, NgramRange};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataMode {
    Text,
    Tabular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    /// Display name in reports; defaults to the file stem.
    #[serde(default)]
    pub name: Option<String>,
    pub path: PathBuf,
    pub mode: DataMode,
    #[serde(default = "default_text_column")]
    pub text_column: String,
    #[serde(default = "default_label_column")]
    pub label_column: String,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    /// Stratified sample of this many rows, drawn with the evaluation seed before anything else.
    #[serde(default)]
    pub subsample: Option<usize>,
}

fn default_text_column() -> String {
    "text".into()
}

fn default_label_column() -> String {
    "label".into()
}

fn default_delimiter() -> char {
    ','
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub min_df: usize,
    pub ngram_min: usize,
    pub ngram_max: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { min_df: 5, ngram_min: 1, ngram_max: 3 }
    }
}

impl PipelineConfig {
    pub fn ngram_range(&self) -> NgramRange {
        NgramRange { min: self.ngram_min, max: self.ngram_max }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub thresholds: Vec<f64>,
    pub seed: u64,
    pub test_fraction: f64,
    pub validation_fraction_of_train: f64,
    pub stratified: bool,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        let split = SplitSpec::default();
        EvaluationConfig {
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
            seed: split.seed,
            test_fraction: split.test_fraction,
            validation_fraction_of_train: split.validation_fraction_of_train,
            stratified: split.stratified,
        }
    }
}

impl EvaluationConfig {
    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            test_fraction: self.test_fraction,
            validation_fraction_of_train: self.validation_fraction_of_train,
            seed: self.seed,
            stratified: self.stratified,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<ReportFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { directory: PathBuf::from("runs/default"), formats: vec![ReportFormat::Text, ReportFormat::Json] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub learner: LearnerOptions,
    #[serde(default)]
    pub iteration: IterationConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    /// Parses `text`; relative paths resolve against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::config(format!("invalid config: {e}")))?;
        if cfg.dataset.path.is_relative() {
            cfg.dataset.path = base.join(&cfg.dataset.path);
        }
        if cfg.output.directory.is_relative() {
            cfg.output.directory = base.join(&cfg.output.directory);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    /// Command-line overrides. `seed` replaces every seed in the file.
    pub fn apply_overrides(&mut self, seed: Option<u64>, out: Option<&Path>) {
        if let Some(seed) = seed {
            self.evaluation.seed = seed;
            self.iteration.seed = seed;
            self.learner.seed = seed;
        }
        if let Some(out) = out {
            self.output.directory = out.to_path_buf();
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !self.dataset.path.is_file() {
            return Err(CliError::config(format!("dataset file {} does not exist", self.dataset.path.display())));
        }
        if !self.dataset.delimiter.is_ascii() {
            return Err(CliError::config("delimiter must be a single ASCII character"));
        }
        let p = &self.pipeline;
        if p.min_df == 0 || p.ngram_min == 0 || p.ngram_min > p.ngram_max || p.ngram_max > 3 {
            return Err(CliError::config("pipeline needs min_df >= 1 and 1 <= ngram_min <= ngram_max <= 3"));
        }
        if self.evaluation.thresholds.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(CliError::config("thresholds must lie in [0, 1]"));
        }
        if self.output.formats.is_empty() {
            return Err(CliError::config("output.formats must name at least one format"));
        }
        self.learner.validate().map_err(CliError::from)?;
        self.iteration.validate().map_err(CliError::from)?;
        Ok(())
    }

    pub fn dataset_name(&self) -> String {
        self.dataset.name.clone().unwrap_or_else(|| {
            self.dataset.path.file_stem().map_or_else(|| "data".to_string(), |s| s.to_string_lossy().into_owned())
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
