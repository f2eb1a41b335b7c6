//! End-to-end checks of the `airfed` binary: config loading, overrides,
//! output files, and the bias-factor sweep.

use std::path::Path;
use std::process::Command;

fn airfed() -> Command {
    Command::new(env!("CARGO_BIN_EXE_airfed"))
}

fn tiny_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let path = dir.join("config.toml");
    let base = format!(
        "n_clients = 6\nk_selected = 3\nrounds = 4\n\
         synth_train_samples = 240\nsynth_test_samples = 60\n\
         synth_features = 4\nsynth_classes = 3\nmodel_dim = 15\n\
         output_path = \"{}\"\n{extra}",
        dir.join("out.csv").display()
    );
    std::fs::write(&path, base).unwrap();
    path
}

#[test]
fn run_writes_header_and_one_row_per_round() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path(), "");
    let status = airfed().args(["run", "--config"]).arg(&config).status().unwrap();
    assert!(status.success());

    let text = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("round,avg_accuracy,worst_accuracy"));
    for (t, line) in lines[1..].iter().enumerate() {
        assert!(line.starts_with(&format!("{t},")));
    }
}

#[test]
fn run_honors_cli_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path(), "");
    let out = dir.path().join("override.csv");
    let status = airfed()
        .args(["run", "--config"])
        .arg(&config)
        .args(["--policy", "greedy_topk", "--seed", "9", "--bias-factor", "5"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.exists());
    assert!(!dir.path().join("out.csv").exists());
}

#[test]
fn identical_invocations_write_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path(), "");
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    for out in [&out_a, &out_b] {
        let status = airfed()
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert_eq!(
        std::fs::read(&out_a).unwrap(),
        std::fs::read(&out_b).unwrap()
    );
}

#[test]
fn sweep_writes_one_file_per_bias_factor() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path(), "policy = \"ca_afl\"\n");
    let status = airfed()
        .args(["sweep", "--config"])
        .arg(&config)
        .args(["--bias-factors", "0,2,8"])
        .status()
        .unwrap();
    assert!(status.success());
    for c in ["0", "2", "8"] {
        let path = dir.path().join(format!("out_C{c}.csv"));
        assert!(path.exists(), "missing {}", path.display());
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 5);
    }
}

#[test]
fn invalid_config_fails_with_the_offending_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "n_clients = 4\nk_selected = 9\n").unwrap();
    let output = airfed().args(["run", "--config"]).arg(&path).output().unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("k_selected"), "stderr: {stderr}");
}
