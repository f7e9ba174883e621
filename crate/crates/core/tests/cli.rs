use std::path::Path;
use std::process::{Command, Output};

use chirp::harness::{read_metrics, METRICS_HEADER};

fn chirp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chirp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn tiny_run(out: &Path, extra: &[&str]) -> Output {
    let out = out.to_str().unwrap();
    let mut args = vec![
        "run",
        "--domain",
        "maze",
        "--size",
        "4x3",
        "--method",
        "catrl_baseline",
        "--tasks",
        "3",
        "--trials",
        "1",
        "--seed",
        "2",
        "--budget",
        "20000",
        "--out",
        out,
    ];
    args.extend_from_slice(extra);
    chirp(&args)
}

#[test]
fn run_writes_metrics_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = tiny_run(dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let metrics = dir.path().join("metrics_catrl_baseline_trial0.csv");
    let text = std::fs::read_to_string(&metrics).unwrap();
    assert_eq!(text.lines().next(), Some(METRICS_HEADER));
    assert_eq!(read_metrics(&metrics).unwrap().len(), 3);
    assert!(dir.path().join("summary_catrl_baseline.csv").exists());
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# smaller stream\ntasks = 2\nseed = 9\n").unwrap();
    let o = tiny_run(dir.path(), &["--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_metrics(&dir.path().join("metrics_catrl_baseline_trial0.csv")).unwrap();
    assert_eq!(rows.len(), 2);
}

#[test]
fn bad_config_line_fails_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "tasks = 2\nwidth = 9\n").unwrap();
    let o = tiny_run(dir.path(), &["--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn unknown_method_and_domain_fail() {
    let o = chirp(&["run", "--method", "ppo"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("ppo"));
    let o = chirp(&["run", "--domain", "atlantis"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("atlantis"));
}

#[test]
fn emit_curve_rejects_missing_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = chirp(&[
        "emit-curve",
        "--out",
        out.to_str().unwrap(),
        "/nonexistent/metrics.csv",
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("/nonexistent/metrics.csv"));
}

#[test]
fn emit_curve_from_run_output() {
    let dir = tempfile::tempdir().unwrap();
    assert!(tiny_run(dir.path(), &[]).status.success());
    let out = dir.path().join("c.csv");
    let metrics = dir.path().join("metrics_catrl_baseline_trial0.csv");
    let o = chirp(&[
        "emit-curve",
        "--out",
        out.to_str().unwrap(),
        metrics.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        std::fs::read_to_string(out).unwrap(),
        std::fs::read_to_string(dir.path().join("summary_catrl_baseline.csv")).unwrap()
    );
}

#[test]
fn checkpoint_feeds_list_options_and_plan_debug() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = chirp(&[
        "run",
        "--domain",
        "maze",
        "--size",
        "5x5",
        "--method",
        "chirp",
        "--tasks",
        "2",
        "--seed",
        "3",
        "--budget",
        "60000",
        "--checkpoint",
        "--out",
        out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ckpt = dir.path().join("checkpoint_chirp_trial0.txt");
    let o = chirp(&["list-options", "--checkpoint", ckpt.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = chirp(&[
        "plan-debug",
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--start",
        "0.5,0.5",
        "--goal",
        "x in [4, 5); y in [4, 5)",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("start leaf"), "{text}");
}

#[test]
fn plan_debug_on_fresh_domain() {
    let o = chirp(&[
        "plan-debug",
        "--domain",
        "four_rooms",
        "--size",
        "desk",
        "--start",
        "1.5,1.5",
        "--goal",
        "x in [1, 2); y in [2, 3)",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("learn:"));
}

#[test]
fn plan_debug_rejects_bad_start() {
    let o = chirp(&[
        "plan-debug",
        "--domain",
        "maze",
        "--start",
        "one,two",
        "--goal",
        "x in [1, 2)",
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("one"), "{}", stderr(&o));
}
