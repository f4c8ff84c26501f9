use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fmsm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fmsm"))
        .args(args)
        .env("FMSM_THREADS", "2")
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = fmsm(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn generate(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let file = dir.path().join(name);
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", path(&file)]);
    let out = fmsm(&full);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    file
}

#[test]
fn relax_round_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let inst = generate(
        &dir,
        "r.json",
        &[
            "random",
            "--n",
            "12",
            "--colors",
            "3",
            "--matroid",
            "partition",
            "--seed",
            "5",
        ],
    );
    let run = || {
        fmsm(&[
            "solve",
            "--instance",
            path(&inst),
            "--solver",
            "relax-round",
            "--reps",
            "200",
            "--seed",
            "42",
        ])
    };
    let (a, b) = (run(), run());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["runs"].as_array().unwrap().len(), 200);
    assert_eq!(v["summary"]["independent_rate"], 1.0);
    assert_eq!(v["summary"]["concentration_rate"], 1.0);
}

#[test]
fn analyze_gap_family() {
    let dir = TempDir::new().unwrap();
    let inst = generate(&dir, "g.json", &["gap", "--t", "4", "--s", "4"]);
    let v = ok_json(&["analyze", "--instance", path(&inst)]);
    assert!((v["norms"]["r"].as_f64().unwrap() - 0.75).abs() < 1e-6);
    assert_eq!(v["feasible"], true);
}

#[test]
fn two_pass_with_given_ratio() {
    let dir = TempDir::new().unwrap();
    let inst = generate(
        &dir,
        "c.json",
        &[
            "random",
            "--n",
            "10",
            "--objective",
            "graph-cut",
            "--seed",
            "3",
        ],
    );
    let v = ok_json(&[
        "solve",
        "--instance",
        path(&inst),
        "--solver",
        "two-pass-nonmonotone",
        "--alpha-hat",
        "0.5",
        "--reps",
        "5",
    ]);
    let runs = v["runs"].as_array().unwrap();
    assert!(runs.iter().all(|r| r["independent"] == true));
    let target = runs[0]["guarantee"]["target"].as_f64().unwrap();
    assert!((target - 0.125).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let big = generate(&dir, "big.json", &["random", "--n", "18"]);
    assert_eq!(
        fmsm(&["bruteforce", "--instance", path(&big)])
            .status
            .code(),
        Some(6)
    );

    let small = generate(&dir, "s.json", &["random", "--n", "8"]);
    assert_eq!(
        fmsm(&["solve", "--instance", path(&small), "--solver", "bogus"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        fmsm(&[
            "solve",
            "--instance",
            path(&small),
            "--solver",
            "two-pass-nonmonotone",
            "--beta",
            "0.9"
        ])
        .status
        .code(),
        Some(2)
    );

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    assert_eq!(
        fmsm(&["validate", "--instance", path(&bad)]).status.code(),
        Some(3)
    );

    let missing = dir.path().join("missing.json");
    assert_eq!(
        fmsm(&["validate", "--instance", path(&missing)])
            .status
            .code(),
        Some(1)
    );

    let part = generate(
        &dir,
        "p.json",
        &[
            "random",
            "--n",
            "8",
            "--colors",
            "2",
            "--matroid",
            "partition",
        ],
    );
    assert_eq!(
        fmsm(&[
            "solve",
            "--instance",
            path(&part),
            "--solver",
            "decomposable"
        ])
        .status
        .code(),
        Some(5)
    );
}

#[test]
fn validate_and_bruteforce() {
    let dir = TempDir::new().unwrap();
    let inst = generate(
        &dir,
        "v.json",
        &["random", "--n", "9", "--colors", "2", "--seed", "11"],
    );
    let v = ok_json(&["validate", "--instance", path(&inst)]);
    assert_eq!(v["feasible"], true);
    let opt = ok_json(&["bruteforce", "--instance", path(&inst)]);
    assert!(opt["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn bench_totals_match_entries() {
    let dir = TempDir::new().unwrap();
    let corpus = dir.path().join("corpus");
    std::fs::create_dir(&corpus).unwrap();
    for seed in 0..3 {
        let file = corpus.join(format!("i{seed}.json"));
        let out = fmsm(&[
            "gen",
            "random",
            "--n",
            "9",
            "--colors",
            "2",
            "--matroid",
            "partition",
            "--seed",
            &seed.to_string(),
            "--out",
            path(&file),
        ]);
        assert!(out.status.success());
    }
    let welfare = generate(
        &dir,
        "w.json",
        &["welfare", "--agents", "3", "--items", "3", "--colors", "2"],
    );
    let v = ok_json(&[
        "bench",
        "--corpus",
        path(&corpus),
        "--instance",
        path(&welfare),
        "--solver",
        "relax-round,decomposable,two-pass-monotone",
        "--alpha-hat",
        "0.5",
        "--reps",
        "4",
    ]);
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 12);
    let mut total = 0;
    for agg in v["solvers"].as_array().unwrap() {
        let name = agg["solver"].as_str().unwrap();
        let runs: u64 = entries
            .iter()
            .filter(|e| e["solver"] == name)
            .filter_map(|e| e["summary"]["runs"].as_u64())
            .sum();
        assert_eq!(agg["runs"].as_u64().unwrap(), runs);
        total += runs;
    }
    assert_eq!(v["total_runs"].as_u64().unwrap(), total);
    let decomposable = v["solvers"]
        .as_array()
        .unwrap()
        .iter()
        .find(|a| a["solver"] == "decomposable")
        .unwrap();
    assert_eq!(decomposable["skipped"], 3);
}
