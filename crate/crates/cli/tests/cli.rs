use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const A: &str = "8.5,5,8.5,5,8.5,5";
const B: &str = "9.5,8,9.5,8,9.5,8";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hexbucket"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn worked_example() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/worked_example.txt")
}

fn records(out: &Output) -> Vec<Value> {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn example_query(extra: &[&str]) -> Vec<String> {
    let p = worked_example();
    let mut v: Vec<String> = [
        "query", "--points", p.to_str().unwrap(), "--divisions", "2", "--lower", "0", "--upper", "10", "--a", A, "--b", B,
        "--t", "0.1:10",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    v.extend(extra.iter().map(|s| s.to_string()));
    v
}

fn run_owned(args: &[String]) -> Output {
    bin().args(args).output().unwrap()
}

#[test]
fn worked_example_maxcount_both_modes() {
    let recs = records(&run_owned(&example_query(&["--op", "maxcount", "--mode", "both"])));
    assert_eq!(recs.len(), 1);
    let r = &recs[0];
    let est = r["est"]["count"].as_f64().unwrap();
    let t = r["est"]["t"].as_f64().unwrap();
    assert!((est - 3.0636).abs() < 1e-3, "{r}");
    assert!((t - 0.735).abs() < 0.01, "{r}");
    assert_eq!(r["exact"]["count"].as_f64(), Some(5.0));
    assert!(r["error"].as_f64().is_some());
    let cfg = &r["config"];
    assert_eq!(cfg["s"], 5);
    assert_eq!(cfg["divisions"][0], 2);
    assert_eq!(cfg["eps_time"].as_f64(), Some(1e-6));
    assert!(cfg.get("seed").is_some());
}

#[test]
fn gen_zero_points_writes_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("empty.txt");
    let out = run(&["gen", "--n", "0", "--out", f.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&f).unwrap();
    assert!(text.lines().all(|l| l.starts_with('#')));
    assert_eq!(hexbucket::io::parse_points(&text).unwrap().len(), 0);
}

#[test]
fn threshold_ops_require_threshold() {
    for op in ["trange", "tcount", "tsum", "tavg"] {
        let out = run_owned(&example_query(&["--op", op]));
        assert_eq!(out.status.code(), Some(2), "{op}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("--threshold"));
    }
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(run(&["query", "--op", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let out = run_owned(&example_query(&["--op", "maxcount", "--t", "0.1-10"]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn data_errors_exit_one_with_name() {
    let p = worked_example();
    let out = run(&[
        "query", "--points", p.to_str().unwrap(), "--divisions", "2", "--lower", "0", "--upper", "5", "--op", "maxcount",
        "--a", A, "--b", B, "--t", "0.1:10",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("OutOfSpace"));
    let out = run(&[
        "query", "--points", p.to_str().unwrap(), "--divisions", "2", "--lower", "0", "--upper", "10", "--op", "maxcount",
        "--a", A, "--b", A, "--t", "0.1:10",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("DegenerateBox"));
}

#[test]
fn threshold_forms() {
    let abs = records(&run_owned(&example_query(&["--op", "tcount", "--threshold", "1.5", "--mode", "both"])));
    assert_eq!(abs[0]["threshold"].as_f64(), Some(1.5));
    assert!(abs[0]["est"]["count"].as_u64().is_some());
    let rel = records(&run_owned(&example_query(&["--op", "trange", "--threshold", "p50max"])));
    let m = rel[0]["threshold"].as_f64().unwrap();
    assert!((m - 0.5 * 3.0636).abs() < 1e-3, "{m}");
    assert_eq!(rel[0]["exact"], Value::Null);
}

#[test]
fn query_file_runs_each_line() {
    let dir = tempfile::tempdir().unwrap();
    let qf = dir.path().join("q.txt");
    std::fs::write(
        &qf,
        format!(
            "# two queries\n--op maxcount --a {A} --b {B} --t 0.1:10\n--op tsum --threshold 2 --a {A} --b {B} --t 0.1:10 --mode both\n"
        ),
    )
    .unwrap();
    let p = worked_example();
    let recs = records(&run(&[
        "query", "--points", p.to_str().unwrap(), "--divisions", "2", "--lower", "0", "--upper", "10", "--file",
        qf.to_str().unwrap(),
    ]));
    assert_eq!(recs.len(), 2);
    assert_eq!(recs[0]["op"], "maxcount");
    assert_eq!(recs[1]["op"], "tsum");
    assert!(recs[1]["exact"]["sum"].as_f64().is_some());
}

#[test]
fn saved_index_gives_identical_results() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.txt");
    let snap = dir.path().join("idx.txt");
    let (p, s) = (pts.to_str().unwrap(), snap.to_str().unwrap());
    assert!(run(&["gen", "--n", "3000", "--seed", "5", "--out", p]).status.success());
    let built = records(&run(&["build", "--points", p, "--divisions", "5", "--save", s]));
    assert_eq!(built[0]["config"]["seed"], 5);
    let corner_a = "-10,20,-10,20,-10,20";
    let corner_b = "60,80,60,80,60,80";
    for op in [
        vec!["--op", "maxcount"],
        vec!["--op", "mincount"],
        vec!["--op", "countrange"],
        vec!["--op", "trange", "--threshold", "p40max"],
    ] {
        let mut common = vec!["--a", corner_a, "--b", corner_b, "--t", "0.5:4"];
        common.extend(&op);
        let mut from_points = vec!["query", "--points", p, "--divisions", "5"];
        from_points.extend(&common);
        let mut from_index = vec!["query", "--index", s];
        from_index.extend(&common);
        let x = records(&run(&from_points));
        let y = records(&run(&from_index));
        assert_eq!(x[0]["est"].to_string(), y[0]["est"].to_string(), "{op:?}");
        assert_eq!(x[0]["threshold"], y[0]["threshold"]);
        assert_eq!(x[0]["config"]["divisions"], y[0]["config"]["divisions"]);
    }
    let exact_needs_points = run(&["query", "--index", s, "--op", "maxcount", "--a", corner_a, "--b", corner_b, "--t", "0.5:4", "--mode", "exact"]);
    assert_eq!(exact_needs_points.status.code(), Some(2));
}

#[test]
fn env_overrides_are_echoed() {
    let out = bin()
        .args(example_query(&["--op", "maxcount"]))
        .env("HEXBUCKET_BISECT_MAX", "4")
        .env("HEXBUCKET_EPS_TIME", "1e-8")
        .output()
        .unwrap();
    let r = &records(&out)[0];
    assert_eq!(r["config"]["bisect_max"], 4);
    assert_eq!(r["config"]["eps_time"].as_f64(), Some(1e-8));
}

#[test]
fn inspect_reports_residuals() {
    let p = worked_example();
    let recs = records(&run(&["inspect", "--points", p.to_str().unwrap(), "--divisions", "2", "--lower", "0", "--upper", "10"]));
    assert_eq!(recs.len(), 2);
    assert_eq!(recs[0]["count"], 10);
    assert_eq!(recs[0]["trends"][0]["slope"].as_f64(), Some(0.7));
    assert!(recs[1]["max_residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn bench_writes_records_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("report.jsonl");
    let out = run(&[
        "bench", "--sizes", "2000", "--divisions", "3", "--queries", "10", "--out", out_file.to_str().unwrap(), "--table",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: Vec<Value> = std::fs::read_to_string(&out_file)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r["seed"] == 1 && r["divisions"] == 3 && r["n"] == 2000));
    assert!(String::from_utf8_lossy(&out.stdout).contains("operator"));
    let empty = run(&["bench", "--queries", "0"]);
    assert!(empty.status.success());
    assert!(empty.stdout.is_empty());
}
