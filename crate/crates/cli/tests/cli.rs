use std::path::Path;
use std::process::{Command, Output};

fn contracts(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contracts"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &Path, name: &str, extra: &[&str]) -> std::path::PathBuf {
    let out = dir.join(name);
    let mut args = vec!["gen", "--out", path_str(&out)];
    args.extend_from_slice(extra);
    let o = contracts(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--n", "6", "--m", "2", "--seed", "42"];
    let a = gen(dir.path(), "a.json", &args);
    let b = gen(dir.path(), "b.json", &args);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn generated_instances_verify() {
    let dir = tempfile::tempdir().unwrap();
    let xos = gen(dir.path(), "x.json", &["--class", "xos", "--n", "5", "--m", "2"]);
    let cov = gen(dir.path(), "c.json", &["--class", "coverage", "--costs", "zero"]);
    for f in [xos, cov] {
        let o = contracts(&["verify", path_str(&f)]);
        assert!(o.status.success());
        assert!(String::from_utf8_lossy(&o.stdout).starts_with("ok"));
    }
}

#[test]
fn solve_prints_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("min.json");
    std::fs::write(
        &f,
        r#"{"version": 1, "agents": 1, "projects": 1, "costs": [[0.1]],
            "functions": [{"type": "additive", "values": [0.4]}]}"#,
    )
    .unwrap();
    let o = contracts(&["solve", path_str(&f)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["method"], "dominant_matching");
    assert!((report["total_revenue"].as_f64().unwrap() - 0.3).abs() < 1e-12);

    let o = contracts(&["solve", path_str(&f), "--exact"]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["method"], "brute_force");
    assert!((report["total_revenue"].as_f64().unwrap() - 0.3).abs() < 1e-12);
}

#[test]
fn debug_lp_goes_to_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen(dir.path(), "i.json", &["--n", "4"]);
    let o = contracts(&["solve", path_str(&f), "--debug-lp"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("# restricted LP"));
    serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap();
}

#[test]
fn malformed_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.json");
    std::fs::write(&f, "{ not json").unwrap();
    let o = contracts(&["solve", path_str(&f)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("parse error"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(contracts(&["gen", "--class", "nonsense"]).status.code(), Some(2));
    assert_eq!(contracts(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let f = gen(dir.path(), "i.json", &[]);
    assert_eq!(contracts(&["solve", path_str(&f), "--delta", "1.5"]).status.code(), Some(2));
}

#[test]
fn component_error_exits_1() {
    // XOS next to coverage has no usable oracle.
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("mixed.json");
    std::fs::write(
        &f,
        r#"{"version": 1, "agents": 1, "projects": 2, "costs": [[0.0, 0.0]],
            "functions": [{"type": "xos", "clauses": [[0.3]]},
                          {"type": "coverage", "weights": [0.5], "covers": [[0]]}]}"#,
    )
    .unwrap();
    let o = contracts(&["solve", path_str(&f)]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bench_writes_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("b.csv");
    let o = contracts(&["bench", "--count", "10", "--n", "5", "--m", "2", "--out", path_str(&csv)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("median ratio"));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("seed,n,m,class,approx,exact,ratio"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    for row in rows {
        let ratio: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(ratio > 0.0 && ratio <= 1.0 + 1e-9, "{row}");
        assert!(ratio >= 1.0 / 10240.0 - 1e-9);
    }
}

#[test]
fn bench_zero_count_is_header_only() {
    let o = contracts(&["bench", "--count", "0"]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout), "seed,n,m,class,approx,exact,ratio\n");
}
