use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn varspeech(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varspeech")).args(args).current_dir(dir).output().expect("run varspeech")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn pipeline(dir: &Path) {
    let o = varspeech(
        &["pipeline", "--mode", "mock", "--seed", "3", "--values", "2", "--target", "2", "--out", "run"],
        dir,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(varspeech(&["nope"], dir.path()).status.code(), Some(1));
    assert_eq!(varspeech(&["split", "--ratios", "0.5,0.5"], dir.path()).status.code(), Some(1));
    assert_eq!(varspeech(&["stats", "--input", "missing.jsonl"], dir.path()).status.code(), Some(1));
    fs::write(dir.path().join("bad.jsonl"), "{\"text\": 1}\n").unwrap();
    assert_eq!(varspeech(&["stats", "--input", "bad.jsonl"], dir.path()).status.code(), Some(3));
    fs::write(
        dir.path().join("live.toml"),
        "mode = \"live\"\nchat_profile = \"dead\"\n\n[[profiles]]\nname = \"dead\"\nbackend = \"openai\"\nendpoint = \"http://127.0.0.1:9/v1\"\nmodel = \"m\"\ncredential_env = \"VARSPEECH_TEST_KEY\"\ntimeout_secs = 2\n",
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_varspeech"))
        .args(["--config", "live.toml", "gen-values", "--count", "2"])
        .current_dir(dir.path())
        .env("VARSPEECH_TEST_KEY", "x")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(varspeech(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn split_stats_score_chain() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path());
    let o = varspeech(&["split", "--input", "run/samples.jsonl", "--out", "split"], dir.path());
    assert!(o.status.success());
    for f in ["split.jsonl", "train.jsonl", "valid.jsonl", "test.jsonl"] {
        assert!(dir.path().join("split").join(f).exists(), "{f}");
    }
    let stats: serde_json::Value =
        serde_json::from_str(&stdout(&varspeech(&["stats", "--input", "split/split.jsonl"], dir.path()))).unwrap();
    let n = stats["num_samples"].as_u64().unwrap();
    let counts = &stats["split_counts"];
    let sum: u64 = ["train", "valid", "test"].iter().map(|k| counts[k].as_u64().unwrap()).sum();
    assert_eq!(sum, n);

    let pred = varspeech(&["extract", "--input", "run/samples.jsonl"], dir.path());
    fs::write(dir.path().join("pred.jsonl"), &pred.stdout).unwrap();
    let score: serde_json::Value = serde_json::from_str(&stdout(&varspeech(
        &["score", "--pred", "pred.jsonl", "--gold", "run/samples.jsonl"],
        dir.path(),
    )))
    .unwrap();
    assert_eq!(score["overall"]["accuracy"], 1.0);
    assert_eq!(score["overall"]["fn"], 0);
}

#[test]
fn manifest_records_seed_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path());
    let text = fs::read_to_string(dir.path().join("run/manifest.jsonl")).unwrap();
    let m: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(m["command"], "pipeline");
    assert_eq!(m["seed"], 3);
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    assert!(m["sub_seeds"]["generation"].is_u64());
    let files: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|o| o["file"].as_str().unwrap()).collect();
    assert_eq!(files, ["samples.jsonl", "report.json"]);
}

#[test]
fn flags_override_config_and_json_fallback() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "seed = 3\nkind = \"dob\"\n").unwrap();
    fs::write(dir.path().join("c.json"), "{\"seed\": 3, \"kind\": \"dob\"}").unwrap();
    let a = stdout(&varspeech(&["--config", "c.toml", "gen-values", "--count", "2"], dir.path()));
    let b = stdout(&varspeech(&["--config", "c.json", "gen-values", "--count", "2"], dir.path()));
    assert_eq!(a, b);
    assert!(a.contains("date_of_birth"));
    let c = stdout(&varspeech(&["--config", "c.toml", "gen-values", "--count", "2", "--kind", "zip"], dir.path()));
    assert!(c.contains("zip_code"));
    fs::write(dir.path().join("bad.toml"), "seed = \"x\"\n").unwrap();
    assert_eq!(varspeech(&["--config", "bad.toml", "stats"], dir.path()).status.code(), Some(3));
}

#[test]
fn optimize_and_similarity_offline() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path());
    assert!(varspeech(&["split", "--input", "run/samples.jsonl", "--out", "split"], dir.path()).status.success());
    let o = varspeech(
        &["optimize", "--input", "split/split.jsonl", "--iterations", "2", "--batch-size", "4", "--out", "opt"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let best: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("opt/best.json")).unwrap()).unwrap();
    assert_eq!(best["running_best"].as_array().unwrap().len(), 3);
    assert!(dir.path().join("opt/trace.jsonl").exists());

    let o = varspeech(&["similarity", "--input", "run/samples.jsonl", "--out", "sim"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(dir.path().join("sim/similarity.txt")).unwrap();
    assert!(table.starts_with("Entity") && table.contains("zip_code"));
}

#[test]
fn gen_transcripts_and_validate() {
    let dir = tempfile::tempdir().unwrap();
    let o = varspeech(
        &[
            "gen-transcripts",
            "--kind",
            "zip",
            "--value",
            "90210",
            "--variations",
            "digit_by_digit,hesitation",
            "--count",
            "2",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    fs::write(dir.path().join("t.jsonl"), &o.stdout).unwrap();
    assert_eq!(stdout(&o).lines().count(), 2);
    let v = stdout(&varspeech(&["validate", "--input", "t.jsonl"], dir.path()));
    assert!(v.lines().all(|l| l.contains("\"validated\":true")));
}
