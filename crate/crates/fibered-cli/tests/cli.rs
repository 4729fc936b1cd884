//! End-to-end runs of the `fibered` binary: exit codes, config overrides, determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fibered"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn report(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("JSON report on stdout")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("fibered-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn ess_norm_of_constant_passes() {
    let o = run(&["ess-norm", "--symbol", "const:0.7"]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    assert_eq!(r["schema"], "fibered-report/1");
    assert!((r["report"]["estimate"]["estimate"].as_f64().unwrap() - 0.7).abs() < 0.035);
}

#[test]
fn obstruction_reports_n_times_w() {
    for (n, w) in [("1", "1"), ("1", "-1"), ("-1", "1"), ("0", "1")] {
        let o = run(&["obstruction", "--problem", &format!("example4:{n}"), "--w", w]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let inv = report(&o)["report"]["obstruction"]["invariant"].as_i64().unwrap();
        assert_eq!(inv, n.parse::<i64>().unwrap() * w.parse::<i64>().unwrap());
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["fredholm", "--symbol", "no_such_symbol"]).status.code(), Some(2));
    assert_eq!(run(&["fredholm", "--symbol", "aps", "--ladder", "8,4"]).status.code(), Some(2));
    assert_eq!(run(&["bvp", "--problem", "example9"]).status.code(), Some(2));
    assert_eq!(run(&["--bogus-flag"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
}

#[test]
fn contract_failure_exits_one() {
    // The `example4` problem as stated violates the operator-symbol condition.
    let o = run(&["bvp", "--problem", "example4:0", "--grid", "6,6"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("operator_margin"));
}

#[test]
fn config_values_are_overridden_by_flags() {
    let d = scratch("cfg");
    let cfg = d.join("run.cfg");
    std::fs::write(&cfg, "[general]\nseed = 5\n\n[fredholm]\nsymbol = winding(2)\nladder = 8,12,16\n").unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "fredholm"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(&o)["report"]["index"], -2);
    let o = run(&["--config", cfg.to_str().unwrap(), "fredholm", "--symbol", "unit_winding"]);
    assert_eq!(report(&o)["report"]["symbol"], "unit_winding");
    std::fs::write(&cfg, "[fredholm]\nsymbol = aps\nladder = 8,x\n").unwrap();
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "fredholm"]).status.code(), Some(2));
}

#[test]
fn outputs_are_deterministic() {
    let d = scratch("det");
    for k in 0..2 {
        let out = d.join(format!("run{k}"));
        let o = run(&["--out", out.to_str().unwrap(), "bvp", "--problem", "example3", "--grid", "6,6", "--seed", "9"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["bvp.json", "bvp.csv"] {
        let a = std::fs::read(d.join("run0").join(f)).unwrap();
        let b = std::fs::read(d.join("run1").join(f)).unwrap();
        assert!(!a.is_empty() && a == b, "{f} differs between runs");
    }
}

#[test]
fn bvp_solves_supplied_data() {
    let d = scratch("data");
    // Scalar trace problem on a 1×1 grid: 9 modes, rank 1.
    let zeros = vec![0.0; 9];
    let ones = vec![1.0; 9];
    std::fs::write(d.join("f.json"), serde_json::json!({"terms": [{"mu": 0.7, "re": ones, "im": zeros}]}).to_string()).unwrap();
    std::fs::write(d.join("g.json"), serde_json::json!({"re": ones, "im": zeros}).to_string()).unwrap();
    let o = run(&["bvp", "--problem", "scalar", "--grid", "1,1", "--ladder", "1,2,3", "--solve", d.join("f.json").to_str().unwrap(), d.join("g.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(report(&o)["report"]["residuals"]["boundary"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn compose_test_emits_csv_curve() {
    let o = run(&["--csv", "compose-test", "--a", "smooth1", "--b", "aps", "--grid", "24,24", "--shells", "4,8,16"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("shell,norm\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn list_builtins_names_the_corpus() {
    let o = run(&["--list-builtins"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["corpus"].as_array().unwrap().len(), 8);
}
