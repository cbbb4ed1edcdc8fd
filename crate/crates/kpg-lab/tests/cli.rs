//! Binary-level contract: flags, exit codes, stdout format, artifacts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kpg-lab"))
}

fn write_file(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

const QUADRATIC: &str = r#"{
    "game": {"kind": "quadratic"},
    "algo": "kpg",
    "K": 2,
    "etas": [0.1, 0.1],
    "steps": 10,
    "start": [[1.0], [1.0]]
}"#;

#[test]
fn run_succeeds_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_file(dir.path(), "quad.json", QUADRATIC);
    let output = binary().args(["run", "--config"]).arg(&config).output().unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let trace = std::fs::read_to_string(dir.path().join("quad.trace.csv")).unwrap();
    assert!(trace.starts_with("update,k,agent,step_dist,dist_star,bound_t1,return\n"));
    assert!(dir.path().join("quad.echo.json").exists());
}

#[test]
fn missing_required_key_exits_2_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_file(
        dir.path(),
        "no_depth.json",
        r#"{"game": {"kind": "quadratic"}, "algo": "kpg", "etas": [0.1, 0.1]}"#,
    );
    let output = binary().args(["run", "--config"]).arg(&config).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains('K'), "{}", stderr(&output));
}

#[test]
fn malformed_json_exits_2_with_line_reference() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_file(dir.path(), "broken.json", "{\n  \"game\": {\n");
    let output = binary().args(["run", "--config"]).arg(&config).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    // The message carries path:line:column.
    assert!(stderr(&output).contains("broken.json:3"), "{}", stderr(&output));
}

#[test]
fn missing_config_file_exits_2() {
    let output =
        binary().args(["run", "--config", "/nonexistent/nowhere.json"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn degenerate_geometry_exits_3() {
    // Agents exactly one step apart, with agent 2 heading straight at
    // agent 1: its landing coincides with agent 1's position, where the
    // meeting direction is undefined.
    let dir = tempfile::tempdir().unwrap();
    let theta2 = std::f64::consts::PI;
    let text = format!(
        r#"{{
            "game": {{"kind": "meetup", "iota1": [0.0, 0.0], "iota2": [1.0, 0.0]}},
            "algo": "kpg",
            "K": 1,
            "etas": [0.1, 0.1],
            "steps": 1,
            "start": [[0.0], [{theta2}]]
        }}"#
    );
    let config = write_file(dir.path(), "degenerate.json", &text);
    let output = binary().args(["run", "--config"]).arg(&config).output().unwrap();
    assert_eq!(output.status.code(), Some(3), "{}", stderr(&output));
}

#[test]
fn seed_sweep_writes_index_in_seed_order() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_file(dir.path(), "quad.json", QUADRATIC);
    let output = binary()
        .args(["run", "--config"])
        .arg(&config)
        .args(["--seeds", "0..3"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let index = std::fs::read_to_string(dir.path().join("quad.index.txt")).unwrap();
    let lines: Vec<&str> = index.lines().collect();
    assert_eq!(lines.len(), 3);
    for (i, line) in lines.iter().enumerate() {
        assert!(line.ends_with(&format!("quad.seed{i}.trace.csv")), "{line}");
        assert!(Path::new(line).exists());
    }
}

#[test]
fn seed_and_seeds_flags_conflict() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_file(dir.path(), "quad.json", QUADRATIC);
    let output = binary()
        .args(["run", "--config"])
        .arg(&config)
        .args(["--seed", "1", "--seeds", "0..2"])
        .output()
        .unwrap();
    assert_ne!(output.status.code(), Some(0));
}

#[test]
fn verify_prints_the_theorem_line_and_exits_0_on_pass() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_file(dir.path(), "quad.json", QUADRATIC);
    let output = binary()
        .args(["verify", "--theorem", "2", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let line = stdout(&output);
    let line = line.trim_end();
    // Exact shape: THEOREM 2 PASS checked=<int> violations=<int>
    let parts: Vec<&str> = line.split(' ').collect();
    assert_eq!(parts.len(), 5, "{line}");
    assert_eq!(parts[0], "THEOREM");
    assert_eq!(parts[1], "2");
    assert_eq!(parts[2], "PASS");
    assert!(parts[3].starts_with("checked=") && parts[3][8..].parse::<usize>().is_ok());
    assert!(parts[4].starts_with("violations=") && parts[4][11..].parse::<usize>().is_ok());
    assert!(dir.path().join("quad.theorem2.csv").exists());
}

#[test]
fn verify_reports_skipped_preconditions_with_exit_0() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_file(
        dir.path(),
        "hot.json",
        r#"{
            "game": {"kind": "quadratic"},
            "algo": "kpg",
            "K": 2,
            "etas": [2.5, 2.5]
        }"#,
    );
    let output = binary()
        .args(["verify", "--theorem", "1", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    assert!(stdout(&output).contains("THEOREM 1 SKIPPED"), "{}", stdout(&output));
}

#[test]
fn verify_rejects_theorem_numbers_outside_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_file(dir.path(), "quad.json", QUADRATIC);
    let output = binary()
        .args(["verify", "--theorem", "4", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_ne!(output.status.code(), Some(0));
}

#[test]
fn plot_renders_each_kind_from_a_real_run() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{
        "game": {"kind": "matrix", "action_counts": [2, 2], "payoffs": [4.0, 0.0, 0.0, 2.0]},
        "algo": "tabular-kmappo",
        "K": 2,
        "etas": [0.5, 0.5],
        "steps": 20
    }"#;
    let config = write_file(dir.path(), "matrix.json", text);
    let run = binary().args(["run", "--config"]).arg(&config).output().unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let trace = dir.path().join("matrix.trace.csv");

    for kind in ["trajectory", "k-convergence", "learning-curve"] {
        let output = binary()
            .arg("plot")
            .arg(&trace)
            .args(["--kind", kind])
            .output()
            .unwrap();
        // The tabular trace has no dist_star, so k-convergence is an input
        // error; the other kinds render.
        if kind == "k-convergence" {
            assert_eq!(output.status.code(), Some(2), "{kind}");
        } else {
            assert_eq!(output.status.code(), Some(0), "{kind}: {}", stderr(&output));
            let svg_path = dir.path().join(format!("matrix.trace.{kind}.svg"));
            let doc = std::fs::read_to_string(&svg_path).unwrap();
            assert!(doc.starts_with("<svg "));
        }
    }
}

#[test]
fn plot_rejects_header_only_traces_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let trace = write_file(
        dir.path(),
        "empty.trace.csv",
        "update,k,agent,step_dist,dist_star,bound_t1,return\n",
    );
    let output = binary()
        .arg("plot")
        .arg(&trace)
        .args(["--kind", "trajectory"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("nothing to plot"), "{}", stderr(&output));
}

#[test]
fn plot_names_the_first_bad_column_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let trace = write_file(
        dir.path(),
        "bad.trace.csv",
        "update,level,agent,step_dist,dist_star,bound_t1,return\n0,1,,0.5,,,\n",
    );
    let output = binary()
        .arg("plot")
        .arg(&trace)
        .args(["--kind", "trajectory"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let msg = stderr(&output);
    assert!(msg.contains("`level`") && msg.contains("`k`"), "{msg}");
}

#[test]
fn log_env_var_controls_verbosity() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_file(dir.path(), "quad.json", QUADRATIC);
    let quiet = binary().args(["run", "--config"]).arg(&config).output().unwrap();
    assert_eq!(quiet.status.code(), Some(0));
    assert!(!stderr(&quiet).contains("wrote"), "{}", stderr(&quiet));

    let chatty = binary()
        .env("KPG_LAB_LOG", "info")
        .args(["run", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(chatty.status.code(), Some(0));
    assert!(stderr(&chatty).contains("wrote"), "{}", stderr(&chatty));
}
