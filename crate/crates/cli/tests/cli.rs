use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_eos-scst"))
}

fn core_fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write_lines(dir: &TempDir, name: &str, lines: &[Value]) -> String {
    let path = dir.path().join(name);
    let text: String = lines.iter().map(|v| format!("{v}\n")).collect();
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn identical_pair(dir: &TempDir) -> (String, String) {
    let refs = write_lines(
        dir,
        "refs.jsonl",
        &[
            json!({"image_id": "1", "refs": ["a dog runs on the grass"]}),
            json!({"image_id": "2", "refs": ["two cats sleep on a red sofa"]}),
        ],
    );
    let cands = write_lines(
        dir,
        "cands.jsonl",
        &[
            json!({"image_id": "1", "samples": ["a dog runs on the grass"]}),
            json!({"image_id": "2", "samples": ["two cats sleep on a red sofa"]}),
        ],
    );
    (cands, refs)
}

#[test]
fn identical_captions_score_ten_under_cider_d() {
    let dir = TempDir::new().unwrap();
    let (cands, refs) = identical_pair(&dir);
    let v = stdout_json(&run(&["score", "--candidates", &cands, "--refs", &refs, "--metric", "cider-d"]));
    assert_eq!(v["corpus_mean"].as_f64().unwrap(), 10.0);
    assert_eq!(v["signature"], "STANDARD_wInit+Cider-D[n4,s6.0]+1.0.0");
    let raw = String::from_utf8(run(&["score", "--candidates", &cands, "--refs", &refs]).stdout).unwrap();
    assert!(raw.contains("10.000000"));
}

#[test]
fn identical_captions_score_one_under_bleu() {
    let dir = TempDir::new().unwrap();
    let (cands, refs) = identical_pair(&dir);
    let v = stdout_json(&run(&["score", "--candidates", &cands, "--refs", &refs, "--metric", "bleu"]));
    assert!((v["corpus_mean"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn missing_refs_file_exits_two_naming_the_path() {
    let dir = TempDir::new().unwrap();
    let (cands, _) = identical_pair(&dir);
    let missing = dir.path().join("nowhere.jsonl");
    let out = run(&["score", "--candidates", &cands, "--refs", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.jsonl"));
}

#[test]
fn sign_from_answers_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("answers.txt");
    fs::write(&path, "n\nn\nc\nd\n4\n6\ng\n1\n").unwrap();
    let out = run(&["sign", "--answers", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "NO<EOS>MODE_wInit+Cider-D[n4,s6.0]+greedy[nspi1]+1.0.0");
}

#[test]
fn malformed_answers_exit_two() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("answers.txt");
    fs::write(&path, "y\nmaybe\n").unwrap();
    let out = run(&["sign", "--answers", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    fs::write(&path, "y\ny\n").unwrap();
    assert_eq!(run(&["sign", "--answers", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn interactive_abort_exits_130() {
    let out = run_stdin(&["sign"], "y\nx\n");
    assert_eq!(out.status.code(), Some(130));
    assert!(out.stdout.is_empty());
}

#[test]
fn interactive_defaults_give_standard_signature() {
    let out = run_stdin(&["sign"], "\n\n\n\n\n\n\n\n");
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "STANDARD_wInit+Cider-D[n4,s6.0]+average[nspi5]+1.0.0");
}

/// Joins the micro fixtures into one batch file.
fn micro_batch_file(dir: &TempDir) -> String {
    let refs: Vec<Value> = fs::read_to_string(core_fixture("micro_refs.jsonl"))
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let lines: Vec<Value> = fs::read_to_string(core_fixture("micro_samples.jsonl"))
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let mut s: Value = serde_json::from_str(l).unwrap();
            let r = refs.iter().find(|r| r["image_id"] == s["image_id"]).unwrap();
            s["refs"] = r["refs"].clone();
            s.as_object_mut().unwrap().remove("base");
            s
        })
        .collect();
    write_lines(dir, "batch.jsonl", &lines)
}

#[test]
fn average_baseline_advantages_sum_to_zero() {
    let dir = TempDir::new().unwrap();
    let batch = micro_batch_file(&dir);
    let out = run(&[
        "reward", "--batch", &batch, "--class", "standard", "--init", "batch", "--base", "average", "--nspi", "5",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["signature"], "STANDARD_w/oInit+Cider-D[n4,s6.0]+average[nspi5]+1.0.0");
    for img in v["images"].as_array().unwrap() {
        let sum: f64 = img["advantages"].as_array().unwrap().iter().map(|a| a.as_f64().unwrap()).sum();
        assert!(sum.abs() < 1e-5, "{sum}");
    }
}

#[test]
fn fixture_batch_matches_reference_rewards() {
    let dir = TempDir::new().unwrap();
    let batch = micro_batch_file(&dir);
    let corpus = core_fixture("micro_refs.jsonl");
    let v = stdout_json(&run(&[
        "reward",
        "--batch",
        &batch,
        "--corpus",
        corpus.to_str().unwrap(),
        "--signature",
        "STANDARD_wInit+Cider-D[n4,s6.0]+average[nspi5]+1.0.0",
    ]));
    let oracle: Value = serde_json::from_str(&fs::read_to_string(core_fixture("oracle_scores.json")).unwrap()).unwrap();
    let expected = oracle["batches"]["standard_corpus_cider_d_average"].as_array().unwrap();
    let got = v["images"].as_array().unwrap();
    assert_eq!(got.len(), expected.len());
    for (g, e) in got.iter().zip(expected) {
        for key in ["rewards", "advantages"] {
            for (a, b) in g[key].as_array().unwrap().iter().zip(e[key].as_array().unwrap()) {
                assert!((a.as_f64().unwrap() - b.as_f64().unwrap()).abs() < 1e-6, "{key}: {a} vs {b}");
            }
        }
        assert!((g["base"].as_f64().unwrap() - e["base"].as_f64().unwrap()).abs() < 1e-6);
    }
}

#[test]
fn signature_and_config_flags_conflict() {
    let dir = TempDir::new().unwrap();
    let batch = micro_batch_file(&dir);
    let out = run(&[
        "reward",
        "--batch",
        &batch,
        "--signature",
        "STANDARD_w/oInit+Cider-D[n4,s6.0]+average[nspi5]+1.0.0",
        "--class",
        "no-eos",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["reward", "--batch", &batch]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mixed_class_needs_opt_in() {
    let dir = TempDir::new().unwrap();
    let batch = micro_batch_file(&dir);
    let args = ["reward", "--batch", &batch, "--class", "mixed-init", "--init", "batch", "--base", "average", "--nspi", "5"];
    assert_eq!(run(&args).status.code(), Some(1));
    let mut with = args.to_vec();
    with.push("--allow-mixed");
    let v = stdout_json(&run(&with));
    assert!(v["signature"].as_str().unwrap().starts_with("MIXED<EOS>INIT_w/oInit"));
}

#[test]
fn wrong_sample_count_is_a_validation_failure() {
    let dir = TempDir::new().unwrap();
    let batch = micro_batch_file(&dir);
    let out = run(&["reward", "--batch", &batch, "--class", "standard", "--init", "batch", "--base", "average", "--nspi", "4"]);
    assert_eq!(out.status.code(), Some(1));
}

fn half_artifacts(dir: &TempDir) -> String {
    write_lines(
        dir,
        "caps.jsonl",
        &[
            json!({"image_id": "1", "samples": ["a man riding a horse", "a man riding a"]}),
            json!({"image_id": "2", "samples": ["a plate of food", "a plate of food on"]}),
        ],
    )
}

#[test]
fn audit_reports_half_artifacts() {
    let dir = TempDir::new().unwrap();
    let caps = half_artifacts(&dir);
    let v = stdout_json(&run(&["audit", "--candidates", &caps]));
    assert_eq!(v["artifact_rate"].as_f64().unwrap(), 0.5);
    assert_eq!(v["total"], 4);
    assert_eq!(v["lexicon_version"], "1.0.0");
    let classes = v["classes"].as_array().unwrap();
    assert_eq!(classes.len(), 8);
    assert_eq!(classes[1]["class"], "a");
    assert_eq!(classes[1]["count"], 1);
    assert_eq!(classes[5]["class"], "on");
    assert_eq!(classes[5]["count"], 1);
}

#[test]
fn audit_clean_writes_stripped_captions() {
    let dir = TempDir::new().unwrap();
    let caps = half_artifacts(&dir);
    let out_path = dir.path().join("clean.jsonl");
    let v = stdout_json(&run(&["audit", "--candidates", &caps, "--clean", out_path.to_str().unwrap()]));
    assert_eq!(v["unstrippable"], 0);
    let text = fs::read_to_string(&out_path).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["samples"], json!(["a man riding a horse", "a man riding"]));
    assert_eq!(lines[1]["samples"], json!(["a plate of food", "a plate of food"]));
}

#[test]
fn audit_with_custom_lexicon() {
    let dir = TempDir::new().unwrap();
    let caps = half_artifacts(&dir);
    let lex = dir.path().join("lex.txt");
    fs::write(&lex, "version: 2.1.0\nriding\n").unwrap();
    let v = stdout_json(&run(&["audit", "--candidates", &caps, "--lexicon", lex.to_str().unwrap()]));
    assert_eq!(v["lexicon_version"], "2.1.0");
}

#[test]
fn empty_audit_input_exits_two() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("empty.jsonl");
    fs::write(&path, "").unwrap();
    let out = run(&["audit", "--candidates", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
