use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use temport_cli::{run, EXIT_DATA, EXIT_OK, EXIT_USAGE};

fn temport(args: &[&str]) -> i32 {
    run(std::iter::once("temport").chain(args.iter().copied()))
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

fn read_json(path: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const SYNTH: &str = r#"{"n_tweets": 2500, "n_events": 25, "n_entities": 8, "seed": 5}"#;

/// Runs the whole pipeline in `dir`; returns the files whose bytes must be
/// reproducible.
fn pipeline(dir: &Path) -> Vec<PathBuf> {
    std::fs::write(dir.join("synth.json"), SYNTH).unwrap();
    let steps: Vec<Vec<String>> = vec![
        vec!["synth".into(), "--config".into(), p(dir, "synth.json"), "--out-prefix".into(), p(dir, "syn")],
        vec!["split".into(), "--corpus".into(), p(dir, "syn.corpus.jsonl"), "--out-prefix".into(), p(dir, "part")],
        vec!["extract-events".into(), "--corpus".into(), p(dir, "part.train.jsonl"), "--top".into(), "1000".into(), "--min-count".into(), "3".into(), "--out".into(), p(dir, "events.tsv")],
        vec!["label".into(), "--corpus".into(), p(dir, "part.train.jsonl"), "--events".into(), p(dir, "events.tsv"), "--window".into(), "7".into(), "--neg-ratio".into(), "1".into(), "--seed".into(), "3".into(), "--out".into(), p(dir, "bags.jsonl")],
        vec!["label".into(), "--corpus".into(), p(dir, "part.dev.jsonl"), "--events".into(), p(dir, "events.tsv"), "--seed".into(), "3".into(), "--out".into(), p(dir, "dev_bags.jsonl")],
        vec!["train-recognizer".into(), "--bags".into(), p(dir, "bags.jsonl"), "--model".into(), "midat".into(), "--alpha-p".into(), "-5".into(), "--alpha-r".into(), "5".into(), "--epochs".into(), "5".into(), "--lr".into(), "0.1".into(), "--seed".into(), "1".into(), "--out".into(), p(dir, "rec.model")],
        vec!["train-normalizer".into(), "--bags".into(), p(dir, "bags.jsonl"), "--recognizer".into(), p(dir, "rec.model"), "--groups".into(), "temporal_tag,lexical,lexical_pos,day_diff,week_diff".into(), "--out".into(), p(dir, "norm.model")],
        vec!["tag".into(), "--corpus".into(), p(dir, "syn.corpus.jsonl"), "--recognizer".into(), p(dir, "rec.model"), "--out".into(), p(dir, "all.tags")],
        vec!["resolve".into(), "--corpus".into(), p(dir, "part.test.jsonl"), "--recognizer".into(), p(dir, "rec.model"), "--normalizer".into(), p(dir, "norm.model"), "--threshold".into(), "0.3".into(), "--out".into(), p(dir, "test.dates")],
        vec!["eval".into(), "--gold".into(), p(dir, "part.test.jsonl"), "--pred".into(), p(dir, "test.dates"), "--mode".into(), "dates".into(), "--out".into(), p(dir, "dates_report.json")],
        vec!["eval".into(), "--gold".into(), p(dir, "syn.tags.txt"), "--pred".into(), p(dir, "all.tags"), "--mode".into(), "tags".into(), "--out".into(), p(dir, "tags_report.json")],
        vec!["sweep".into(), "--corpus".into(), p(dir, "part.dev.jsonl"), "--recognizer".into(), p(dir, "rec.model"), "--normalizer".into(), p(dir, "norm.model"), "--out".into(), p(dir, "sweep.json")],
    ];
    for s in &steps {
        let args: Vec<&str> = s.iter().map(String::as_str).collect();
        assert_eq!(temport(&args), EXIT_OK, "step failed: {args:?}");
    }
    ["events.tsv", "bags.jsonl", "rec.model", "norm.model", "all.tags", "test.dates", "dates_report.json", "tags_report.json", "sweep.json"]
        .iter()
        .map(|f| dir.join(f))
        .collect()
}

#[test]
fn full_pipeline_writes_reports_and_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let outputs = pipeline(d);
    for f in &outputs {
        let m = format!("{}.manifest.json", f.display());
        assert!(f.exists(), "{}", f.display());
        assert!(Path::new(&m).exists(), "missing {m}");
    }
    assert!(d.join("syn.manifest.json").exists());
    assert!(d.join("part.manifest.json").exists());

    let report = read_json(&p(d, "dates_report.json"));
    for k in ["precision", "recall", "f1"] {
        assert!(report["overall"][k].is_number(), "{k} missing from {report}");
    }
    let tags = read_json(&p(d, "tags_report.json"));
    assert!(tags["overall"]["f1"].as_f64().unwrap() > 0.5, "{tags}");
    let sweep = read_json(&p(d, "sweep.json"));
    assert_eq!(sweep["rows"].as_array().unwrap().len(), 21);

    let m = read_json(&format!("{}.manifest.json", p(d, "rec.model")));
    assert_eq!(m["command"], "train-recognizer");
    assert_eq!(m["seed"], 1);
    assert_eq!(m["config"]["alpha_p"], -5.0);
    assert!(m["argv"].as_array().unwrap().len() > 5);
    let s = read_json(&p(d, "part.manifest.json"));
    assert!(s["details"]["epoch"].is_string());
}

#[test]
fn rerun_is_byte_identical_and_inputs_untouched() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = pipeline(a.path());
    let corpus_before = std::fs::read(a.path().join("part.train.jsonl")).unwrap();
    let second = pipeline(b.path());
    for (x, y) in first.iter().zip(&second) {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{} differs", x.display());
    }
    // rerunning in place rewrites outputs, never inputs
    let _ = pipeline(a.path());
    assert_eq!(std::fs::read(a.path().join("part.train.jsonl")).unwrap(), corpus_before);
}

#[test]
fn default_grid_contains_large_penalty_reward_pair() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("synth.json"), r#"{"n_tweets": 600, "n_events": 6, "n_entities": 3, "seed": 1}"#).unwrap();
    assert_eq!(temport(&["synth", "--config", &p(d, "synth.json"), "--out-prefix", &p(d, "s")]), EXIT_OK);
    assert_eq!(temport(&["extract-events", "--corpus", &p(d, "s.corpus.jsonl"), "--out", &p(d, "ev.tsv")]), EXIT_OK);
    assert_eq!(temport(&["label", "--corpus", &p(d, "s.corpus.jsonl"), "--events", &p(d, "ev.tsv"), "--out", &p(d, "bags.jsonl")]), EXIT_OK);
    let code = temport(&["train-recognizer", "--bags", &p(d, "bags.jsonl"), "--model", "midat", "--grid", "default", "--epochs", "2", "--out", &p(d, "m.model")]);
    assert_eq!(code, EXIT_OK);
    let m = read_json(&format!("{}.manifest.json", p(d, "m.model")));
    let grid = m["details"]["grid"].as_array().unwrap();
    assert!(grid.iter().any(|g| g[0] == -25.0 && g[1] == 500.0), "{grid:?}");
    assert_eq!(m["details"]["grid_scores"].as_array().unwrap().len(), grid.len());

    std::fs::write(d.join("grid.txt"), "# two points\n-1 1\n-25, 500\n").unwrap();
    let code = temport(&["train-recognizer", "--bags", &p(d, "bags.jsonl"), "--model", "midat", "--grid", &p(d, "grid.txt"), "--epochs", "1", "--out", &p(d, "g.model")]);
    assert_eq!(code, EXIT_OK);
    let m = read_json(&format!("{}.manifest.json", p(d, "g.model")));
    assert_eq!(m["details"]["grid"].as_array().unwrap().len(), 2);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(temport(&["tag", "--bogus"]), EXIT_USAGE);
    assert_eq!(temport(&["no-such-command"]), EXIT_USAGE);
    assert_eq!(temport(&["eval", "--gold", "a", "--pred", "b", "--mode", "words", "--out", "c"]), EXIT_USAGE);
    assert_eq!(temport(&["train-recognizer", "--bags", "b", "--model", "midat", "--alpha-p", "-1", "--out", "m"]), EXIT_USAGE);
    assert_eq!(temport(&["--help"]), EXIT_OK);
    assert_eq!(temport(&["--version"]), EXIT_OK);
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(temport(&["extract-events", "--corpus", &p(d, "missing.jsonl"), "--out", &p(d, "ev.tsv")]), EXIT_DATA);
    std::fs::write(d.join("bad.jsonl"), "{\"id\": \"1\", \"created_at\": \"2016-13-01\", \"tokens\": []}\n").unwrap();
    assert_eq!(temport(&["extract-events", "--corpus", &p(d, "bad.jsonl"), "--out", &p(d, "ev.tsv")]), EXIT_DATA);
    assert!(!d.join("ev.tsv").exists());
    std::fs::write(d.join("synth.json"), r#"{"mention_dropout": 1.5}"#).unwrap();
    assert_eq!(temport(&["synth", "--config", &p(d, "synth.json"), "--out-prefix", &p(d, "s")]), EXIT_DATA);
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_temport");
    let out = Command::new(bin).arg("--frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert!(!out.stderr.is_empty());
    let out = Command::new(bin).arg("help").output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["extract-events", "label", "train-recognizer", "train-normalizer", "tag", "resolve", "eval", "synth", "sweep"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
    let out = Command::new(bin).args(["tag", "--corpus", "/nonexistent/c.jsonl", "--recognizer", "/nonexistent/r", "--out", "/nonexistent/o"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_DATA));
}
