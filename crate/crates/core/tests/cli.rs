//! The command-line front end, driven as a separate process.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tendon-biped"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_analyze_compare_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run(
        &[
            "run",
            "--preset",
            "GAS+SOL,SOL",
            "--duration",
            "15",
            "--settle-time",
            "5",
            "--out",
            "runs",
        ],
        d,
    );
    assert!(out.status.success(), "{}", stderr(&out));
    for stem in ["gas-sol", "sol"] {
        assert!(d.join(format!("runs/{stem}.csv")).is_file());
        assert!(d.join(format!("runs/{stem}.meta.json")).is_file());
        let a = run(&["analyze", &format!("runs/{stem}.csv")], d);
        assert!(a.status.success(), "{}", stderr(&a));
        assert!(stdout(&a).contains("amplification"));
        for f in ["metrics.json", "curves.csv", "coordination.csv"] {
            assert!(
                d.join(format!("runs/{stem}.report/{f}")).is_file(),
                "{stem} {f}"
            );
        }
    }

    let text = run(
        &[
            "compare",
            "runs/gas-sol.report",
            "runs/sol.report/metrics.json",
        ],
        d,
    );
    assert!(text.status.success(), "{}", stderr(&text));
    let t = stdout(&text);
    assert!(t.contains("GAS+SOL") && t.contains("total_cot"));

    let csv = run(
        &[
            "compare",
            "runs/gas-sol.report",
            "runs/sol.report",
            "--csv",
            "cmp.csv",
        ],
        d,
    );
    assert!(csv.status.success(), "{}", stderr(&csv));
    let written = std::fs::read_to_string(d.join("cmp.csv")).unwrap();
    assert!(written.starts_with("# tendon-biped comparison"));
    assert!(written
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("metric,GAS+SOL,SOL,delta_SOL"));
}

#[test]
fn config_file_and_cpg_flags_feed_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("soft.toml"),
        "preset = \"GAS\"\n[tendons]\nk_gas = 3000.0\n[sim]\nduration = 2.0\nsettle_time = 0.5\n",
    )
    .unwrap();
    let out = run(
        &[
            "run",
            "--config",
            "soft.toml",
            "--frequency",
            "0.9",
            "--out",
            "o",
        ],
        d,
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let meta = std::fs::read_dir(d.join("o"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.to_string_lossy().ends_with(".meta.json"))
        .expect("sidecar written");
    let meta = std::fs::read_to_string(meta).unwrap();
    assert!(meta.contains("3000"), "override recorded");
    assert!(meta.contains("0.9"), "frequency recorded");
}

#[test]
fn trajectories_are_written_as_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "trajectories",
            "--preset",
            "SOL",
            "--cycles",
            "2",
            "--dt",
            "0.01",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("# tendon-biped cpg trajectories"));
    let header = lines.next().unwrap();
    assert_eq!(header.split(',').count(), 11);
    // [0, 2) at 10 ms
    assert_eq!(lines.count(), 200);
}

#[test]
fn usage_and_input_errors_have_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(&["run", "--preset", "HAM"], d).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"], d).status.code(), Some(2));
    assert_eq!(run(&["run", "--duration", "-1"], d).status.code(), Some(2));
    assert_eq!(run(&["--help"], d).status.code(), Some(0));

    let missing = run(&["analyze", "nowhere.csv"], d);
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).contains("nowhere.csv"));

    std::fs::write(d.join("empty.toml"), "").unwrap();
    let empty = run(&["run", "--config", "empty.toml"], d);
    assert_eq!(empty.status.code(), Some(1));
    assert!(stderr(&empty).contains("parse"));

    let single = run(&["compare", "a"], d);
    assert_ne!(single.status.code(), Some(0));
}

#[test]
fn trial_shorter_than_its_settle_time_cannot_be_analyzed() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run(
        &["run", "--preset", "SOL", "--duration", "5", "--out", "o"],
        d,
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let a = run(&["analyze", "o/sol.csv"], d);
    assert_eq!(a.status.code(), Some(1));
    assert!(stderr(&a).contains("too short"), "{}", stderr(&a));
}
