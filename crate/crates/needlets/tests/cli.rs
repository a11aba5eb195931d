//! End-to-end checks of the command-line binary: exit codes, manifest
//! completeness, configuration validation, and byte-level reproducibility.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_needlets")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary must spawn")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process must exit normally")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

/// Sorted map of every file under `dir` to its raw bytes.
fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

#[test]
fn default_scales_run_writes_complete_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out = run(&["scales", "--out", out_dir.to_str().unwrap(), "--seed", "7"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "scales");
    assert_eq!(manifest["seed"], 7);
    assert!(manifest["config"].is_object(), "manifest must echo the resolved config");
    assert!(manifest["config"]["family"].is_object());
    let listed: Vec<String> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert!(listed.contains(&"scales.csv".to_string()));
    assert!(listed.contains(&"manifest.json".to_string()));
    for name in &listed {
        assert!(out_dir.join(name).is_file(), "{name} listed but missing on disk");
    }
}

#[test]
fn all_subcommands_run_with_defaults() {
    // The Monte-Carlo commands are tuned down via config to keep this fast.
    let tmp = tempfile::tempdir().unwrap();
    let corr = write_config(
        tmp.path(),
        "corr.json",
        r#"{"level": 3, "replicates": 16, "pairs": 6}"#,
    );
    let gof = write_config(
        tmp.path(),
        "gof.json",
        r#"{"levels": [2], "replicates": 24}"#,
    );
    let loc = write_config(tmp.path(), "loc.json", r#"{"angles": 64}"#);
    let cases: Vec<(&str, Option<&Path>)> = vec![
        ("regimes", None),
        ("windows", None),
        ("localization", Some(loc.as_path())),
        ("correlation", Some(corr.as_path())),
        ("gof", Some(gof.as_path())),
        ("scales", None),
    ];
    for (cmd, config) in cases {
        let out_dir = tmp.path().join(format!("out_{cmd}"));
        let mut args: Vec<&str> = vec![cmd, "--out", out_dir.to_str().unwrap()];
        let cfg_str;
        if let Some(c) = config {
            cfg_str = c.to_str().unwrap().to_string();
            args.push("--config");
            args.push(&cfg_str);
        }
        let out = run(&args);
        assert_eq!(
            exit_code(&out),
            0,
            "{cmd} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(out_dir.join("manifest.json").is_file(), "{cmd}: missing manifest");
    }
}

#[test]
fn identical_config_and_seed_reproduce_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        "corr.json",
        r#"{
          "families": [
            {"family": "mild_exponential", "eta": 1.0, "p": 0.5}
          ],
          "spectrum": {
            "kind": "modulated_sine",
            "alpha": 2.0,
            "terms": [{"c": 1.0, "d": 2.0, "m": 1.0, "beta": 0.5}]
          },
          "level": 3,
          "replicates": 24,
          "pairs": 8
        }"#,
    );
    let cfg = config.to_str().unwrap();
    let dirs = [tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c")];
    // Same seed and config, different output dirs and thread counts.
    for (dir, threads) in dirs.iter().zip(["1", "2", "3"]) {
        let out = run(&[
            "correlation",
            "--config",
            cfg,
            "--out",
            dir.to_str().unwrap(),
            "--seed",
            "42",
            "--threads",
            threads,
        ]);
        assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    let first = snapshot(&dirs[0]);
    assert!(first.iter().any(|(n, _)| n.ends_with(".csv")));
    for dir in &dirs[1..] {
        assert_eq!(first, snapshot(dir), "outputs differ between identical runs");
    }

    // A different seed must change the Monte-Carlo column.
    let other = tmp.path().join("d");
    let out = run(&[
        "correlation",
        "--config",
        cfg,
        "--out",
        other.to_str().unwrap(),
        "--seed",
        "43",
    ]);
    assert_eq!(exit_code(&out), 0);
    assert_ne!(first, snapshot(&other), "seed change must alter outputs");
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out_str = out_dir.to_str().unwrap().to_string();

    // Unknown field.
    let bad_field = write_config(tmp.path(), "bad_field.json", r#"{"levls": 8}"#);
    let out = run(&["windows", "--config", bad_field.to_str().unwrap(), "--out", &out_str]);
    assert_eq!(exit_code(&out), 2);
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("levls"), "error should name the unknown field: {msg}");

    // Malformed JSON.
    let bad_json = write_config(tmp.path(), "bad.json", "{");
    let out = run(&["windows", "--config", bad_json.to_str().unwrap(), "--out", &out_str]);
    assert_eq!(exit_code(&out), 2);

    // Missing file.
    let out = run(&["windows", "--config", "/nonexistent/nope.json", "--out", &out_str]);
    assert_eq!(exit_code(&out), 2);

    // Out-of-range parameter caught by validation.
    let bad_range = write_config(tmp.path(), "bad_range.json", r#"{"levels": 0}"#);
    let out = run(&["windows", "--config", bad_range.to_str().unwrap(), "--out", &out_str]);
    assert_eq!(exit_code(&out), 2);

    // Duplicate family labels.
    let dup = write_config(
        tmp.path(),
        "dup.json",
        r#"{"families": [
            {"family": "polynomial", "eta": 2.0},
            {"family": "polynomial", "eta": 2.0}
        ]}"#,
    );
    let out = run(&["regimes", "--config", dup.to_str().unwrap(), "--out", &out_str]);
    assert_eq!(exit_code(&out), 2);

    // Zero worker threads.
    let out = run(&["scales", "--out", &out_str, "--threads", "0"]);
    assert_eq!(exit_code(&out), 2);

    // Unknown subcommand (argument parsing).
    let out = run(&["frobnicate"]);
    assert_eq!(exit_code(&out), 2);

    // No partial outputs may survive any of the failed runs.
    assert!(!out_dir.exists(), "failed runs must not leave outputs behind");
}

#[test]
fn infeasible_requests_exit_3() {
    let tmp = tempfile::tempdir().unwrap();

    // Scale recursion overflows f64 range before reaching the requested
    // depth, and the command needs the full range.
    let overflow = write_config(
        tmp.path(),
        "overflow.json",
        r#"{"family": {"family": "double_exponential", "a": 300.0, "ratio": 10.0}, "levels": 8}"#,
    );
    let out_dir = tmp.path().join("w");
    let out = run(&[
        "windows",
        "--config",
        overflow.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 3, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(!out_dir.exists());

    // Simulation bandwidth beyond the supported cap.
    let deep = write_config(
        tmp.path(),
        "deep.json",
        r#"{"levels": [9], "replicates": 24}"#,
    );
    let out_dir = tmp.path().join("g");
    let out = run(&[
        "gof",
        "--config",
        deep.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 3, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(!out_dir.exists());
}

#[test]
fn unwritable_output_location_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    // The output path collides with an existing file, so emission fails
    // after a successful computation.
    let blocker = tmp.path().join("occupied");
    fs::write(&blocker, "not a directory").unwrap();
    let out = run(&["scales", "--out", blocker.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 4, "stderr: {}", String::from_utf8_lossy(&out.stderr));
}
