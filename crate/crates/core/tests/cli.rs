use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn setnewton(dir: &Path, args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_setnewton"))
        .args(args)
        .current_dir(dir)
        .env_remove("SETNEWTON_OUT")
        .status()
        .unwrap()
        .code()
        .unwrap()
}

fn write(dir: &Path, name: &str, body: &str) {
    fs::write(dir.join(name), body).unwrap();
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

/// Drops the wall-clock fields so runs can be compared byte for byte.
fn without_times(text: &str) -> String {
    text.lines()
        .filter(|l| !l.contains("wall_time_ms"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn solve_newton_writes_reports() {
    let tmp = tempfile::tempdir().unwrap();
    write(
        tmp.path(),
        "c.json",
        r#"{"problem": "spike1d", "n": 100, "method": "newton"}"#,
    );
    assert_eq!(
        setnewton(tmp.path(), &["solve", "--config", "c.json", "--out", "o"]),
        0
    );
    let out = tmp.path().join("o");
    let s = summary(&out);
    assert_eq!(s["status"], "converged");
    assert!(s["total_nonlinear_iters"].as_u64().unwrap() <= 12);

    let mut rdr = csv::Reader::from_path(out.join("history.csv")).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        [
            "iter",
            "phase",
            "set_size",
            "residual_norm",
            "global_residual_norm",
            "eta",
            "linear_iters",
            "lambda"
        ]
    );
    let lin: u64 = rdr
        .records()
        .map(|r| r.unwrap()[6].parse::<u64>().unwrap())
        .sum();
    assert_eq!(lin, s["total_linear_iters"].as_u64().unwrap());
}

#[test]
fn solve_set_trace_starts_at_the_spike() {
    let tmp = tempfile::tempdir().unwrap();
    write(
        tmp.path(),
        "c.json",
        r#"{"method": "set", "alpha": 0.01, "rule": "residual_mean"}"#,
    );
    assert_eq!(
        setnewton(tmp.path(), &["solve", "--config", "c.json", "--out", "o"]),
        0
    );
    let trace = fs::read_to_string(tmp.path().join("o/settrace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(
        lines.next().unwrap(),
        "iter,set_size,min_abs_index,max_abs_index,members"
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    let size: usize = first[1].parse().unwrap();
    let lo: usize = first[2].parse().unwrap();
    let hi: usize = first[3].parse().unwrap();
    assert!(size <= 16 && lo <= 50 && 50 <= hi);
}

#[test]
fn output_dir_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    write(
        tmp.path(),
        "c.json",
        r#"{"n": 20, "output_dir": "from_config"}"#,
    );
    let run = |env: Option<&str>, out: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_setnewton"));
        cmd.args(["solve", "--config", "c.json"])
            .current_dir(tmp.path())
            .env_remove("SETNEWTON_OUT");
        if let Some(e) = env {
            cmd.env("SETNEWTON_OUT", e);
        }
        if let Some(o) = out {
            cmd.args(["--out", o]);
        }
        assert!(cmd.status().unwrap().success());
    };
    run(None, None);
    assert!(tmp.path().join("from_config/summary.json").exists());
    run(Some("from_env"), None);
    assert!(tmp.path().join("from_env/summary.json").exists());
    run(Some("from_env2"), Some("from_flag"));
    assert!(tmp.path().join("from_flag/summary.json").exists());
    assert!(!tmp.path().join("from_env2").exists());
}

#[test]
fn config_errors_exit_one_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "bad.json", r#"{"problem": "heat"}"#);
    assert_eq!(
        setnewton(tmp.path(), &["solve", "--config", "bad.json", "--out", "o"]),
        1
    );
    assert!(!tmp.path().join("o").exists());

    write(tmp.path(), "broken.json", "{\n  \"n\": 10,\n  oops\n}");
    let out = Command::new(env!("CARGO_BIN_EXE_setnewton"))
        .args(["solve", "--config", "broken.json", "--out", "o"])
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken.json:3:"));

    write(tmp.path(), "empty.json", r#"{"sizes": []}"#);
    assert_eq!(
        setnewton(
            tmp.path(),
            &["sweep", "--config", "empty.json", "--out", "o"]
        ),
        1
    );
    assert_eq!(
        setnewton(tmp.path(), &["solve", "--config", "missing.json"]),
        1
    );
}

#[test]
fn non_convergence_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "c.json", r#"{"max_newton_iters": 2}"#);
    assert_eq!(
        setnewton(tmp.path(), &["solve", "--config", "c.json", "--out", "o"]),
        2
    );
    assert_eq!(summary(&tmp.path().join("o"))["status"], "max_iters");
}

#[test]
fn compare_newton_and_set() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "c.json", r#"{"methods": ["newton", "set"]}"#);
    assert_eq!(
        setnewton(tmp.path(), &["compare", "--config", "c.json", "--out", "o"]),
        0
    );
    let report: Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("o/compare.json")).unwrap())
            .unwrap();
    assert!(report["b"]["outer_cycles"].as_u64() < report["a"]["total_nonlinear_iters"].as_u64());
    assert!(tmp.path().join("o/compare.csv").exists());
}

#[test]
fn compare_same_method_twice_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "c.json", r#"{"methods": ["set", "set"]}"#);
    assert_eq!(
        setnewton(tmp.path(), &["compare", "--config", "c.json", "--out", "o"]),
        0
    );
    let mut rdr = csv::Reader::from_path(tmp.path().join("o/compare.csv")).unwrap();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        assert_eq!(&rec[1], &rec[3]);
        assert_eq!(&rec[2], &rec[4]);
    }
}

#[test]
fn repeated_runs_are_identical() {
    let tmp = tempfile::tempdir().unwrap();
    write(
        tmp.path(),
        "c.json",
        r#"{"method": "set_variant", "n": 150}"#,
    );
    for out in ["r1", "r2"] {
        setnewton(tmp.path(), &["solve", "--config", "c.json", "--out", out]);
    }
    for file in ["history.csv", "settrace.csv", "summary.json"] {
        let a = fs::read_to_string(tmp.path().join("r1").join(file)).unwrap();
        let b = fs::read_to_string(tmp.path().join("r2").join(file)).unwrap();
        assert_eq!(without_times(&a), without_times(&b), "{file}");
    }
}

#[test]
fn sweep_rows() {
    let tmp = tempfile::tempdir().unwrap();
    write(
        tmp.path(),
        "one.json",
        r#"{"sizes": [100], "methods": ["set"]}"#,
    );
    assert_eq!(
        setnewton(tmp.path(), &["sweep", "--config", "one.json", "--out", "a"]),
        0
    );
    let mut rdr = csv::Reader::from_path(tmp.path().join("a/sweep.csv")).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        [
            "size",
            "method",
            "status",
            "nonlinear_iters",
            "outer_cycles",
            "linear_iters",
            "reduced_work",
            "wall_time_ms",
            "set_sizes"
        ]
    );
    assert_eq!(rdr.records().count(), 1);

    write(
        tmp.path(),
        "two.json",
        r#"{"sizes": [500, 1000], "alpha": 0.001}"#,
    );
    assert_eq!(
        setnewton(tmp.path(), &["sweep", "--config", "two.json", "--out", "b"]),
        0
    );
    let mut rdr = csv::Reader::from_path(tmp.path().join("b/sweep.csv")).unwrap();
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| &r[2] == "converged"));
}

#[test]
fn demo2d_solves() {
    let tmp = tempfile::tempdir().unwrap();
    write(
        tmp.path(),
        "c.json",
        r#"{"problem": "demo2d", "n": 10, "method": "set", "rule": "residual_rms", "alpha": 0.1}"#,
    );
    assert_eq!(
        setnewton(tmp.path(), &["solve", "--config", "c.json", "--out", "o"]),
        0
    );
    assert_eq!(summary(&tmp.path().join("o"))["n"], 100);
}
