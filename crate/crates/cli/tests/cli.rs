use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn submax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_submax"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// Rows of a report CSV as header-keyed maps.
fn rows(csv_text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut lines = csv_text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            header
                .iter()
                .map(|h| h.to_string())
                .zip(l.split(',').map(String::from))
                .collect()
        })
        .collect()
}

fn num(row: &std::collections::HashMap<String, String>, col: &str) -> f64 {
    row[col].parse().unwrap_or_else(|_| panic!("{col} = {:?}", row[col]))
}

#[test]
fn usm_modular_matches_golden() {
    let out = submax(&["usm", fixture("modular.json").to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let golden = std::fs::read_to_string(fixture("golden/usm_modular.csv")).unwrap();
    assert_eq!(stdout(&out), golden);
    let r = &rows(&golden)[0];
    assert_eq!((num(r, "value"), num(r, "opt"), num(r, "ratio")), (5.0, 5.0, 1.0));
    // f(∅), f(N), then two per element
    assert_eq!(num(r, "queries"), 8.0);
}

#[test]
fn usm_solvers_and_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let table = fixture("table8.json");
    for (solver, bound) in [("knapsack", 9.0), ("generic", 17.0)] {
        let report = dir.path().join(format!("{solver}.csv"));
        let out = submax(&[
            "usm",
            table.to_str().unwrap(),
            "--solver",
            solver,
            "--verify",
            "--report",
            report.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        assert!(stdout(&out).is_empty());
        let text = std::fs::read_to_string(&report).unwrap();
        let r = &rows(&text)[0];
        assert!(num(r, "ratio") >= 0.5);
        assert!(num(r, "max_support") <= bound);
    }
}

#[test]
fn usm_order_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("dist.tsv");
    let out = submax(&[
        "usm",
        fixture("triangle_cut.json").to_str().unwrap(),
        "--order",
        "2,0,1",
        "--dump-dist",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&dump).unwrap();
    let mass: f64 = text
        .lines()
        .map(|l| l.split('\t').next().unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((mass - 1.0).abs() < 1e-9);
    // final states have X = Y
    for line in text.lines() {
        let state = line.split('\t').nth(1).unwrap();
        let (x, y) = state.split_once(':').unwrap();
        assert_eq!(x, y);
    }
    let bad = submax(&[
        "usm",
        fixture("triangle_cut.json").to_str().unwrap(),
        "--order",
        "0,0,1",
    ]);
    assert_eq!(code(&bad), 2);
}

#[test]
fn input_errors_exit_2() {
    for name in ["malformed.json", "not_json.json", "missing.json"] {
        let out = submax(&["usm", fixture(name).to_str().unwrap()]);
        assert_eq!(code(&out), 2, "{name}");
        assert!(!out.stderr.is_empty());
    }
    let out = submax(&["card", fixture("table8.json").to_str().unwrap(), "--k", "9"]);
    assert_eq!(code(&out), 2);
    let out = submax(&["usm", fixture("modular.json").to_str().unwrap(), "--solver", "magic"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn card_ratio_on_table() {
    let out = submax(&["card", fixture("table8.json").to_str().unwrap(), "--k", "3", "--verify"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = &rows(&stdout(&out))[0];
    assert!(num(r, "ratio") >= 4.0 / 9.0);
    assert!(num(r, "max_support") <= 10.0);
    assert!(num(r, "queries") <= 4.0 * 9.0 * 8.0);

    let out = submax(&["card", fixture("table8.json").to_str().unwrap(), "--k", "0"]);
    let r = &rows(&stdout(&out))[0];
    let f_empty = 1.6;
    assert_eq!(num(r, "value"), f_empty);
}

#[test]
fn verify_suites_pass() {
    for args in [
        vec!["verify", "--suite", "lp", "--seeds", "1000"],
        vec!["verify", "--suite", "card", "--n-max", "10"],
        vec!["verify", "--suite", "usm", "--seeds", "60", "--n-max", "8"],
        vec!["verify", "--suite", "tight"],
    ] {
        let out = submax(&args);
        assert_eq!(code(&out), 0, "{args:?}: {}", stdout(&out));
        assert!(stdout(&out).contains(" 0 violations"));
    }
}

#[test]
fn injected_fault_is_reported() {
    for suite in ["lp", "card"] {
        let out = submax(&[
            "verify",
            "--suite",
            suite,
            "--seeds",
            "10",
            "--n-max",
            "6",
            "--inject-fault",
        ]);
        assert_eq!(code(&out), 3, "{suite}");
        assert!(stdout(&out).contains("violation in"));
    }
    // card violations carry a replayable instance
    let out = submax(&[
        "verify",
        "--suite",
        "card",
        "--seeds",
        "3",
        "--n-max",
        "6",
        "--inject-fault",
    ]);
    assert!(stdout(&out).contains("{\"type\":\"table\""));
}

fn bench(extra_env: Option<&str>, out_path: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_submax"));
    cmd.args([
        "bench",
        "--algos",
        "usm,card,double-greedy,random-greedy",
        "--instances",
        fixture("bench").join("*.json").to_str().unwrap(),
        "--seeds",
        "0..3",
        "--k",
        "1,2",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    if let Some(t) = extra_env {
        cmd.env("SUBMAX_THREADS", t);
    }
    cmd.output().unwrap()
}

#[test]
fn bench_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let golden = std::fs::read_to_string(fixture("golden/bench.csv")).unwrap();
    for threads in [None, Some("1"), Some("4")] {
        let path = dir.path().join("bench.csv");
        let out = bench(threads, &path);
        assert_eq!(code(&out), 0);
        assert_eq!(std::fs::read_to_string(&path).unwrap(), golden, "threads {threads:?}");
    }
    let table = rows(&golden);
    // 3 instances × (usm + 2 card + 3 double greedy + 6 random greedy)
    assert_eq!(table.len(), 36);
    for r in &table {
        assert!(r["ms"].is_empty());
        assert!(num(r, "ratio") <= 1.0 + 1e-12);
        match r["algo"].as_str() {
            "usm" => assert!(num(r, "ratio") >= 0.5),
            "card" => {
                let k = num(r, "k");
                assert!(num(r, "ratio") >= (1.0 - 1.0 / k).powf(k - 1.0) - 1e-12);
            }
            _ => assert!(r["max_support"].is_empty()),
        }
    }
}

#[test]
fn bench_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let out = submax(&[
        "bench",
        "--algos",
        "usm",
        "--instances",
        dir.path().join("*.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        stdout(&out),
        "instance,algo,k,seed,value,opt,ratio,queries,max_support,ms\n"
    );

    // a broken file in the sweep fails its rows only
    let glob = fixture("").join("*.json");
    let out = submax(&["bench", "--algos", "usm", "--instances", glob.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let table = rows(&stdout(&out));
    assert_eq!(table.len(), 5);
    assert!(table
        .iter()
        .any(|r| r["instance"] == "malformed" && r["value"].is_empty()));
    assert!(table.iter().any(|r| r["instance"] == "modular" && r["value"] == "5.0"));

    let out = submax(&["bench", "--algos", "nope", "--instances", "x"]);
    assert_eq!(code(&out), 2);
    let out = submax(&["bench", "--algos", "card", "--instances", "x"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn tight_trace() {
    let out = submax(&["tight", "--k", "32", "--ell", "17"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let (trace, summary) = text.split_once("\n\n").unwrap();
    assert_eq!(rows(trace).len(), 32);
    let s = &rows(summary)[0];
    assert_eq!(num(s, "opt"), 1.0);
    assert!(num(s, "ratio") <= num(s, "bound"));
    assert!((num(s, "bound") - ((-1f64).exp() + 17.0 / 32.0)).abs() < 1e-12);
    let max_dev = rows(trace).iter().map(|r| num(r, "max_deviation")).fold(0.0, f64::max);
    assert!(max_dev <= 1e-7);

    assert_eq!(code(&submax(&["tight", "--k", "10"])), 2);
}
