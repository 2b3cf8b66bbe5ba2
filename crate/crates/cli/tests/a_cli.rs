use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SPEC: &str = r#"
document_count = 800
seed = 2
keywords = [{ word = "alpha", doc_rate = 0.2 }, { word = "beta", doc_rate = 0.3 }]
planted_rules = [{ label = "pos", present = ["alpha"] }, { label = "pos", present = ["beta"] }]
"#;

fn confrule(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confrule")).current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = confrule(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn workspace(run_toml: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("spec.toml"), SPEC).unwrap();
    fs::write(dir.path().join("run.toml"), run_toml).unwrap();
    ok(dir.path(), &["synth", "spec.toml", "--out", "data"]);
    dir
}

const RUN: &str = "[dataset]\npath = \"data/corpus.csv\"\nmode = \"text\"\n[output]\ndirectory = \"out\"\n";

#[test]
fn synth_writes_corpus_and_ground_truth() {
    let dir = workspace(RUN);
    let csv = fs::read_to_string(dir.path().join("data/corpus.csv")).unwrap();
    assert!(csv.starts_with("text,label\n"));
    assert_eq!(csv.lines().count(), 801);
    let truth: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("data/ground_truth.json")).unwrap()).unwrap();
    assert_eq!(truth["planted_rules"].as_array().unwrap().len(), 2);
    assert_eq!(truth["flipped_rows"].as_array().unwrap().len(), 0);
}

#[test]
fn full_pipeline_writes_every_artifact() {
    let dir = workspace(RUN);
    let d = dir.path();
    let prep = ok(d, &["--config", "run.toml", "prep"]);
    assert!(prep.contains("800 examples"), "{prep}");
    for f in ["out/dataset.bin", "out/vocabulary.tsv", "out/prep.json"] {
        assert!(d.join(f).is_file(), "{f}");
    }
    ok(d, &["--config", "run.toml", "train", "--baseline"]);
    ok(d, &["--config", "run.toml", "train", "--iterative"]);
    for f in ["rules.txt", "rules_readable.txt", "metrics.json"] {
        assert!(d.join("out/baseline").join(f).is_file());
        assert!(d.join("out/iterative").join(f).is_file());
    }
    assert!(d.join("out/iterative/traces.json").is_file());
    assert!(!d.join("out/baseline/traces.json").exists());

    let report = ok(d, &["--config", "run.toml", "eval"]);
    assert!(report.contains("t=0.9") && report.contains("FOIL iterative"), "{report}");
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("out/report.json")).unwrap()).unwrap();
    let runs = json["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 2);
    for run in runs {
        assert!(run["report"]["wall_time"].is_null());
        assert!(run["report"]["peak_memory_bytes"].is_null());
        let rows = run["report"]["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 5);
    }
    let resources = fs::read_to_string(d.join("out/resources.txt")).unwrap();
    assert!(resources.contains("Peak memory (MiB)"));
}

#[test]
fn rules_command_filters_by_confidence() {
    let dir = workspace(RUN);
    let d = dir.path();
    ok(d, &["--config", "run.toml", "train", "--iterative"]);
    let all = ok(d, &["rules", "out/iterative/rules.txt"]);
    let strict = ok(d, &["rules", "out/iterative/rules.txt", "--min-voc", "0.99"]);
    assert!(!all.is_empty());
    assert!(strict.lines().count() <= all.lines().count());
    for line in all.lines() {
        let (voc, rule) = line.split_once('\t').unwrap();
        assert!(voc.parse::<f64>().unwrap() <= 1.0);
        assert!(rule.starts_with("IF "), "{rule}");
    }
    for line in strict.lines() {
        assert!(line.split_once('\t').unwrap().0.parse::<f64>().unwrap() > 0.99);
    }
}

#[test]
fn cache_is_reused_and_rebuilt_on_config_change() {
    let dir = workspace(RUN);
    let d = dir.path();
    assert!(!ok(d, &["--config", "run.toml", "prep"]).contains("reused"));
    assert!(ok(d, &["--config", "run.toml", "prep"]).contains("reused"));
    fs::write(d.join("run.toml"), format!("{RUN}[pipeline]\nmin_df = 3\n")).unwrap();
    assert!(!ok(d, &["--config", "run.toml", "prep"]).contains("reused"));
    // A seed change alters the split, not the prepared dataset.
    assert!(ok(d, &["--config", "run.toml", "--seed", "3", "prep"]).contains("reused"));
}

#[test]
fn exit_codes_follow_the_error_class() {
    let dir = workspace(RUN);
    let d = dir.path();
    assert_eq!(confrule(d, &["--config", "missing.toml", "prep"]).status.code(), Some(2));
    fs::write(d.join("bad.toml"), format!("{RUN}[iteration]\nvoc_treshold = 0.5\n")).unwrap();
    assert_eq!(confrule(d, &["--config", "bad.toml", "prep"]).status.code(), Some(2));
    fs::write(d.join("range.toml"), format!("{RUN}[iteration]\nvoc_threshold = 1.5\n")).unwrap();
    assert_eq!(confrule(d, &["--config", "range.toml", "prep"]).status.code(), Some(2));
    fs::write(d.join("nodata.toml"), "[dataset]\npath = \"nope.csv\"\nmode = \"text\"\n").unwrap();
    assert_eq!(confrule(d, &["--config", "nodata.toml", "prep"]).status.code(), Some(2));
    fs::write(d.join("col.toml"), "[dataset]\npath = \"data/corpus.csv\"\nmode = \"text\"\ntext_column = \"body\"\n")
        .unwrap();
    assert_eq!(confrule(d, &["--config", "col.toml", "prep"]).status.code(), Some(2));
    fs::write(d.join("data/broken.csv"), "text,label\n\"unterminated,x\n").unwrap();
    fs::write(d.join("broken.toml"), "[dataset]\npath = \"data/broken.csv\"\nmode = \"text\"\n").unwrap();
    assert_eq!(confrule(d, &["--config", "broken.toml", "prep"]).status.code(), Some(3));
    // Nothing trained yet.
    assert_eq!(confrule(d, &["--config", "run.toml", "eval"]).status.code(), Some(3));
    fs::write(d.join("garbage.txt"), "not a rule set\n").unwrap();
    assert_eq!(confrule(d, &["rules", "garbage.txt"]).status.code(), Some(3));
    assert_eq!(confrule(d, &["synth", "run.toml"]).status.code(), Some(2));
}

#[test]
fn tabular_mode_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut csv = String::from("size,color,label\n");
    for i in 0..300 {
        let size = i % 20;
        let color = ["red", "green", "blue"][i % 3];
        let label = if size >= 12 && color != "blue" { "big" } else { "other" };
        csv.push_str(&format!("{size},{color},{label}\n"));
    }
    fs::write(d.join("t.csv"), csv).unwrap();
    fs::write(
        d.join("run.toml"),
        "[dataset]\npath = \"t.csv\"\nmode = \"tabular\"\n[learner]\nkind = \"ripper\"\n[output]\ndirectory = \"out\"\n",
    )
    .unwrap();
    let out = ok(d, &["--config", "run.toml", "compare"]);
    assert!(out.contains("300 examples"), "{out}");
    assert!(!d.join("out/vocabulary.tsv").exists());
    let rules = ok(d, &["rules", "out/baseline/rules.txt"]);
    assert!(rules.contains("size >="), "{rules}");
}

#[test]
fn subsample_is_stratified() {
    let dir = workspace(
        "[dataset]\npath = \"data/corpus.csv\"\nmode = \"text\"\nsubsample = 200\n[output]\ndirectory = \"out\"\n",
    );
    let d = dir.path();
    ok(d, &["--config", "run.toml", "prep"]);
    let prep: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("out/prep.json")).unwrap()).unwrap();
    assert_eq!(prep["examples"], 200);
    let labels = prep["labels"].as_object().unwrap();
    let full: Vec<String> = fs::read_to_string(d.join("data/corpus.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().to_string())
        .collect();
    for (label, n) in labels {
        let share = full.iter().filter(|l| *l == label).count() as f64 / full.len() as f64;
        assert!((n.as_f64().unwrap() - 200.0 * share).abs() <= 1.0, "{label}");
    }
}
