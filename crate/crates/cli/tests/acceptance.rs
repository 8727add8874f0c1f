//! One pass/fail line per acceptance criterion.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::process::{Command, Output};

fn varspeech(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varspeech"))
        .args(args)
        .current_dir(dir)
        // any network attempt would go to a dead proxy and fail
        .env("HTTP_PROXY", "http://127.0.0.1:9")
        .env("HTTPS_PROXY", "http://127.0.0.1:9")
        .env("ALL_PROXY", "http://127.0.0.1:9")
        .output()
        .expect("run varspeech")
}

fn cli_determinism() -> common::Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let args = ["pipeline", "--mode", "mock", "--seed", "17", "--values", "5", "--target", "3"];
    let a = varspeech(&args, dir.path());
    let b = varspeech(&args, dir.path());
    if !a.status.success() || !b.status.success() {
        return Err(format!("pipeline failed: {}", String::from_utf8_lossy(&a.stderr)));
    }
    if a.stdout.is_empty() || a.stdout != b.stdout {
        return Err("stdout JSONL differs between runs".into());
    }
    for out in ["a", "b"] {
        let mut with_out = args.to_vec();
        with_out.extend(["--out", out]);
        if !varspeech(&with_out, dir.path()).status.success() {
            return Err("pipeline --out failed".into());
        }
    }
    let read = |d: &str| std::fs::read(dir.path().join(d).join("samples.jsonl")).unwrap_or_default();
    if read("a") != read("b") || read("a") != a.stdout {
        return Err("samples.jsonl differs between runs".into());
    }
    let lines = a.stdout.iter().filter(|b| **b == b'\n').count();
    let in_process = common::determinism()?;
    Ok(format!("{lines} JSONL lines identical across CLI runs; {in_process}"))
}

type Criterion = (&'static str, fn() -> common::Check);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("round-trip oracle suite", common::round_trip),
        ("paper example vector", common::paper_examples),
        ("metric correctness", common::metrics_recount),
        ("split contract", common::split_contract),
        ("balance property", common::balance),
        ("optimizer property", common::optimizer_landscape),
        ("cosine properties", common::cosine_properties),
        ("offline determinism", cli_determinism),
        ("robustness", common::robustness),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(e) => {
                println!("criterion {}: FAIL {name}: {e}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
