use std::collections::BTreeMap;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use confrule::dataset::TabularSchema;
use confrule::eval::{
    accuracy_table, comparison_table, evaluate, generate_synthetic, run_baseline, run_iterative, split,
    stratified_subsample, threshold_table, Approach, ComparisonRow, EvaluationReport, RunRecord, Split, SyntheticSpec,
};
use confrule::{format, io, Dataset, RuleSet, Vocabulary};

use crate::config::{DataMode, ReportFormat, RunConfig};
use crate::error::CliError;

const CACHE_FILE: &str = "dataset.bin";

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents).map_err(|e| CliError::from(e).context(format!("writing {}", path.display())))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write(path, text)
}

/// Cache key: the raw input bytes plus every setting that shapes the prepared dataset.
fn cache_tag(cfg: &RunConfig, raw: &[u8]) -> u64 {
    let d = &cfg.dataset;
    // The seed only matters when it drives the subsample.
    let sample = d.subsample.map(|n| (n, cfg.evaluation.seed));
    let settings = format!(
        "{:?}|{}|{}|{}|{:?}|{}|{}|{}",
        d.mode,
        d.text_column,
        d.label_column,
        d.delimiter,
        sample,
        cfg.pipeline.min_df,
        cfg.pipeline.ngram_min,
        cfg.pipeline.ngram_max
    );
    io::content_hash(&[raw, settings.as_bytes()])
}

fn subsample<T: Clone>(items: &[T], rows: &[u32]) -> Vec<T> {
    rows.iter().map(|&r| items[r as usize].clone()).collect()
}

fn build_dataset(cfg: &RunConfig) -> Result<Dataset, CliError> {
    let d = &cfg.dataset;
    let delim = d.delimiter as u8;
    match d.mode {
        DataMode::Text => {
            let (mut docs, mut labels) = io::read_text_csv(&d.path, &d.text_column, &d.label_column, delim)?;
            if let Some(n) = d.subsample {
                let rows = stratified_subsample(&labels, n, cfg.evaluation.seed)?;
                docs = subsample(&docs, &rows);
                labels = subsample(&labels, &rows);
            }
            let vocab = Vocabulary::build(&docs, cfg.pipeline.min_df, cfg.pipeline.ngram_range())?;
            Ok(Dataset::from_text(&docs, &labels, vocab)?)
        }
        DataMode::Tabular => {
            let (names, mut rows, mut labels) = io::read_tabular_rows(&d.path, &d.label_column, delim)?;
            if let Some(n) = d.subsample {
                let keep = stratified_subsample(&labels, n, cfg.evaluation.seed)?;
                rows = subsample(&rows, &keep);
                labels = subsample(&labels, &keep);
            }
            let (schema, values) = TabularSchema::infer(&names, &rows)?;
            Ok(Dataset::from_tabular(schema, values, &labels)?)
        }
    }
}

/// Summary of a prepared dataset, written next to the cache.
#[derive(Debug, Serialize)]
pub struct PrepSummary {
    pub dataset: String,
    pub mode: &'static str,
    pub examples: usize,
    pub labels: BTreeMap<String, usize>,
    pub vocabulary_size: Option<usize>,
    pub cache_tag: String,
    pub reused_cache: bool,
}

/// Loads the prepared dataset, rebuilding the cache when it is missing or stale.
pub fn prep(cfg: &RunConfig) -> Result<(Dataset, PrepSummary), CliError> {
    let out = &cfg.output.directory;
    let raw = fs::read(&cfg.dataset.path)
        .map_err(|e| CliError::from(e).context(format!("reading {}", cfg.dataset.path.display())))?;
    let tag = cache_tag(cfg, &raw);
    drop(raw);
    let cache = out.join(CACHE_FILE);
    let cached = if cache.is_file() { io::read_cache(&cache, tag).ok().flatten() } else { None };
    let reused = cached.is_some();
    let data = match cached {
        Some(d) => d,
        None => {
            let d = build_dataset(cfg)?;
            fs::create_dir_all(out)?;
            io::write_cache(&cache, &d, tag)?;
            if let Some(v) = d.vocabulary() {
                let f = fs::File::create(out.join("vocabulary.tsv"))?;
                v.write_tsv(BufWriter::new(f))?;
            }
            d
        }
    };
    let summary = PrepSummary {
        dataset: cfg.dataset_name(),
        mode: data.mode().as_str(),
        examples: data.len(),
        labels: data.labels().iter().cloned().zip(data.label_counts()).collect(),
        vocabulary_size: data.vocabulary().map(Vocabulary::len),
        cache_tag: format!("{tag:016x}"),
        reused_cache: reused,
    };
    write_json(&out.join("prep.json"), &summary)?;
    Ok((data, summary))
}

pub fn print_prep(s: &PrepSummary) {
    let counts: Vec<String> = s.labels.iter().map(|(l, n)| format!("{l}={n}")).collect();
    match s.vocabulary_size {
        Some(v) => println!("{}: {} examples, V={v}, labels {}", s.dataset, s.examples, counts.join(" ")),
        None => println!("{}: {} examples, labels {}", s.dataset, s.examples, counts.join(" ")),
    }
    if s.reused_cache {
        println!("reused cached dataset {}", s.cache_tag);
    }
}

fn approach_name(a: Approach) -> &'static str {
    match a {
        Approach::Baseline => "baseline",
        Approach::Iterative => "iterative",
    }
}

fn readable(rs: &RuleSet) -> String {
    let mut out = String::new();
    for sr in rs.rules() {
        let flag = if sr.accepted { "" } else { "  (fallback)" };
        out.push_str(&format!(
            "{:.4}\t{}{flag}\n",
            sr.voc,
            confrule::rule::render(&sr.rule, rs.attributes(), rs.target_name())
        ));
    }
    out
}

/// Learns one rule set and writes it under `<out>/<approach>/`.
pub fn train(cfg: &RunConfig, data: &Dataset, sp: &Split, approach: Approach) -> Result<RunRecord, CliError> {
    let thresholds = &cfg.evaluation.thresholds;
    let run = match approach {
        Approach::Baseline => run_baseline(data, sp, &cfg.learner, thresholds)?,
        Approach::Iterative => run_iterative(data, sp, &cfg.iteration, &cfg.learner, thresholds)?,
    };
    let dir = cfg.output.directory.join(approach_name(approach));
    write(&dir.join("rules.txt"), format::serialize(&run.ruleset))?;
    write(&dir.join("rules_readable.txt"), readable(&run.ruleset))?;
    if approach == Approach::Iterative {
        write_json(&dir.join("traces.json"), &run.traces)?;
    }
    let metrics = json!({
        "dataset": cfg.dataset_name(),
        "approach": approach,
        "learner": cfg.learner.kind.as_str(),
        "rules": run.ruleset.len(),
        "wall_time_seconds": run.report.wall_time.map(|d| d.as_secs_f64()),
        "peak_memory_bytes": run.report.peak_memory_bytes,
        "config": cfg,
    });
    write_json(&dir.join("metrics.json"), &metrics)?;
    Ok(run)
}

pub fn print_train(run: &RunRecord) {
    let name = approach_name(run.approach);
    let accepted = run.ruleset.rules().iter().filter(|r| r.accepted).count();
    println!(
        "{name}: {} rules ({accepted} above threshold), test accuracy {:.2}%",
        run.ruleset.len(),
        100.0 * run.report.accuracy
    );
    if let (Some(t), Some(m)) = (run.report.wall_time, run.report.peak_memory_bytes) {
        println!("{name}: {:.3} s, peak {:.2} MiB", t.as_secs_f64(), m as f64 / (1024.0 * 1024.0));
    }
}

pub fn split_dataset(cfg: &RunConfig, data: &Dataset) -> Result<Split, CliError> {
    Ok(split(data, &cfg.evaluation.split_spec())?)
}

pub fn read_rules(path: &Path) -> Result<RuleSet, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::from(e).context(format!("reading {}", path.display())))?;
    format::parse(&text).map_err(|e| CliError::from(e).context(format!("parsing {}", path.display())))
}

/// Rule files written by `train` in the output directory, baseline first.
pub fn default_rule_files(cfg: &RunConfig) -> Vec<PathBuf> {
    ["baseline", "iterative"]
        .iter()
        .map(|a| cfg.output.directory.join(a).join("rules.txt"))
        .filter(|p| p.is_file())
        .collect()
}

fn run_label(path: &Path) -> String {
    path.parent()
        .and_then(Path::file_name)
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

/// Evaluates each rule file on the test split and writes `report.txt` / `report.json`.
///
/// Reports hold no timings or memory figures, so they are byte-identical across runs with
/// the same seed. Those go to `resources.txt`.
pub fn eval(cfg: &RunConfig, data: &Dataset, sp: &Split, files: &[PathBuf]) -> Result<String, CliError> {
    if files.is_empty() {
        return Err(CliError::data("no rule files to evaluate; run `train` first"));
    }
    let name = cfg.dataset_name();
    let test = data.select(sp.test.clone());
    let mut text = String::new();
    let mut runs = Vec::new();
    let mut rows = Vec::new();
    let mut resources = Vec::new();
    for path in files {
        let rs = read_rules(path)?;
        let mut report: EvaluationReport = evaluate(&rs, &test, &cfg.evaluation.thresholds, cfg.learner.execution)?;
        report.wall_time = None;
        report.peak_memory_bytes = None;
        let label = run_label(path);
        let learner = format!("{} {label}", cfg.learner.kind.as_str());
        text.push_str(&threshold_table(&format!("{name} {learner}"), &report));
        text.push('\n');
        rows.push(ComparisonRow {
            data: name.clone(),
            learner: learner.clone(),
            peak_memory_bytes: None,
            accuracy: report.accuracy,
        });
        let metrics = path.with_file_name("metrics.json");
        if let Ok(m) = fs::read_to_string(&metrics) {
            let v: serde_json::Value = serde_json::from_str(&m)?;
            resources.push(ComparisonRow {
                data: name.clone(),
                learner,
                peak_memory_bytes: v["peak_memory_bytes"].as_u64(),
                accuracy: report.accuracy,
            });
        }
        runs.push(json!({ "run": label, "rules": rs.len(), "report": report }));
    }
    text.push_str(&accuracy_table(&rows));
    text.push_str("\n# configuration\n");
    text.push_str(&cfg.to_toml());

    let out = &cfg.output.directory;
    if cfg.output.formats.contains(&ReportFormat::Text) {
        write(&out.join("report.txt"), &text)?;
    }
    if cfg.output.formats.contains(&ReportFormat::Json) {
        let doc = json!({
            "dataset": name,
            "split": { "train": sp.train.len(), "valid": sp.valid.len(), "test": sp.test.len() },
            "config": cfg,
            "runs": runs,
        });
        write_json(&out.join("report.json"), &doc)?;
    }
    if !resources.is_empty() {
        write(&out.join("resources.txt"), comparison_table(&resources))?;
    }
    Ok(text)
}

/// `voc<TAB>rule` lines for rules with confidence above `min_voc`.
pub fn list_rules(rs: &RuleSet, min_voc: f64) -> String {
    rs.rules()
        .iter()
        .filter(|r| r.voc > min_voc)
        .map(|r| format!("{:.4}\t{}\n", r.voc, confrule::rule::render(&r.rule, rs.attributes(), rs.target_name())))
        .collect()
}

/// Generates a corpus from a TOML spec into `out/corpus.csv` and `out/ground_truth.json`.
pub fn synth(spec_path: &Path, out: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(spec_path)
        .map_err(|e| CliError::config(format!("cannot read spec {}: {e}", spec_path.display())))?;
    let spec: SyntheticSpec = toml::from_str(&text).map_err(|e| CliError::config(format!("invalid spec: {e}")))?;
    let (corpus, planted) = generate_synthetic(&spec)?;
    fs::create_dir_all(out)?;
    io::write_text_csv(&out.join("corpus.csv"), &corpus.docs, &corpus.labels)?;
    let flipped: Vec<usize> = corpus.flipped.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| i).collect();
    write_json(
        &out.join("ground_truth.json"),
        &json!({ "spec": spec, "planted_rules": planted, "flipped_rows": flipped }),
    )?;
    println!("wrote {} documents ({} labels flipped) to {}", corpus.docs.len(), flipped.len(), out.display());
    Ok(())
}
