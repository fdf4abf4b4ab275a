//! End-to-end checks of the command-line interface.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_greedlab"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("greedlab-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn no_arguments_prints_usage_and_fails() {
    let out = bin().output().unwrap();
    assert!(!out.status.success());
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("USAGE"), "{text}");
}

#[test]
fn unknown_subcommand_fails() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn unknown_flag_fails() {
    let out = bin().args(["dp", "--bogus", "1"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

#[test]
fn dp_single_start_prints_the_cycle() {
    let dir = temp_dir("dp");
    let out = bin()
        .args(["dp", "--problem", "oscillating", "--rho", "0.9"])
        .args(["--out", dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("Cycle{period 2}"), "{text}");
    assert!(dir.join("outcomes.csv").exists());
    assert!(dir.join("summary.json").exists());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn enumerate_reports_fixed_point_counts() {
    let dir = temp_dir("enum");
    let out = bin()
        .args(["enumerate", "--problem", "worst"])
        .args(["--out", dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("API fixed points: 1"), "{text}");
    assert!(text.contains("AVI fixed points: 1"), "{text}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn rl_then_plot_produces_an_svg() {
    let dir = temp_dir("rlplot");
    let out = bin()
        .args(["rl", "--algorithm", "ac-td0", "--problem", "multiple"])
        .args(["--runs", "2", "--episodes", "40"])
        .args(["--out", dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let svg = dir.join("fig.svg");
    let out = bin()
        .args(["plot", "--input"])
        .arg(dir.join("runs.csv"))
        .args(["--style", "figure5", "--output"])
        .arg(&svg)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let body = std::fs::read_to_string(&svg).unwrap();
    assert!(body.starts_with("<svg"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn config_file_overrides_flags() {
    let dir = temp_dir("cfg");
    std::fs::create_dir_all(&dir).unwrap();
    let config_path = dir.join("config.json");
    let out_dir = dir.join("exp");
    std::fs::write(
        &config_path,
        format!(
            r#"{{
                "algorithm": "api",
                "problem": "worst",
                "n_runs": 3,
                "out_dir": {:?}
            }}"#,
            out_dir.to_str().unwrap()
        ),
    )
    .unwrap();
    // The flag says oscillating with 7 runs; the config overrides both.
    let out = bin()
        .args(["dp", "--problem", "oscillating", "--runs", "7"])
        .args(["--config", config_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = std::fs::read_to_string(out_dir.join("summary.json")).unwrap();
    assert!(summary.contains("\"n_runs\": 3"), "{summary}");
    assert!(summary.contains("worst"), "{summary}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn out_root_environment_variable_prefixes_relative_paths() {
    let root = temp_dir("root");
    let out = bin()
        .args(["dp", "--problem", "worst", "--rho", "0.3", "--out", "nested/exp"])
        .env("GREEDLAB_OUT", root.to_str().unwrap())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(root.join("nested/exp/summary.json").exists());
    let _ = std::fs::remove_dir_all(&root);
}

#[test]
fn custom_mdp_file_runs_through_dp() {
    let dir = temp_dir("mdp");
    std::fs::create_dir_all(&dir).unwrap();
    let mdp_path = dir.join("chain.json");
    std::fs::write(
        &mdp_path,
        r#"{
            "n_states": 2,
            "n_actions": 2,
            "start_state": 0,
            "transitions": [
                {"state": 0, "action": 0, "outcomes": [{"prob": 1.0, "next": 1, "reward": 1.0}]},
                {"state": 0, "action": 1, "outcomes": [{"prob": 1.0, "next": "terminal", "reward": 0.0}]},
                {"state": 1, "action": 0, "outcomes": [{"prob": 1.0, "next": "terminal", "reward": 2.0}]},
                {"state": 1, "action": 1, "outcomes": [{"prob": 1.0, "next": "terminal", "reward": 2.0}]}
            ]
        }"#,
    )
    .unwrap();
    let out = bin()
        .args(["dp", "--mdp", mdp_path.to_str().unwrap(), "--runs", "1"])
        .args(["--out", dir.join("exp").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn accept_fast_passes() {
    let out = bin().args(["accept", "--fast"]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(
        out.status.success(),
        "stdout:\n{text}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for i in [1, 2, 3, 4, 5, 8] {
        assert!(text.contains(&format!("criterion {i}: PASS")), "{text}");
    }
    assert!(!text.contains("criterion 6"), "{text}");
}
