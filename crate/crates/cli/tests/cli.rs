use std::process::{Command, Output};

use finitegap::Lattice;
use num_complex::Complex64;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finitegap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn csv_rows(out: &Output) -> Vec<csv::StringRecord> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let (header, body) = text.split_once('\n').unwrap();
    assert!(header.starts_with("# finitegap "));
    assert!(header.contains("tol_gap=1e-6"));
    csv::Reader::from_reader(body.as_bytes())
        .records()
        .map(|r| r.unwrap())
        .collect()
}

#[test]
fn qpoly_1001_has_a_complex_pair() {
    let out = run(&["qpoly", "--n", "1,0,0,1", "--tau", "0+1.2i"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["result"]["roots"].as_array().unwrap().len(), 3);
    assert_eq!(v["result"]["classification"], "has_complex");
    assert_eq!(v["tolerances"]["tol_im"], 1e-6);
    let re = &v["result"]["coefficients"][0]["re"];
    assert!(re.is_f64());
}

#[test]
fn qpoly_2000_has_five_real_roots() {
    let out = run(&["qpoly", "--n", "2,0,0,0", "--tau", "0+1i", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let roots: Vec<_> = csv_rows(&out).into_iter().filter(|r| &r[0] == "root").collect();
    assert_eq!(roots.len(), 5);
    let summary: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(summary["summary"]["classification"], "real_distinct");
    assert_eq!(summary["summary"]["route_agreement"], true);
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        vec!["qpoly", "--n", "0,0,0,0", "--tau", "0+1i"],
        vec!["qpoly", "--n", "1,0,0", "--tau", "0+1i"],
        vec!["qpoly", "--n", "1,0,0,0", "--tau", "oops"],
        vec!["qpoly", "--n", "1,0,0,0", "--tau", "0+1i", "--tol", "bogus=1"],
        vec!["qpoly", "--n", "1,0,0,0", "--tau", "0-1i"],
        vec!["bands", "--n", "1,0,0,0", "--tau", "0.2+1i", "--E", "-5:5:11"],
        vec!["premodular", "--op", "zero-find", "--n", "2"],
        vec!["premodular", "--op", "transform", "--n", "5", "--r", "0.1", "--s", "0.2", "--tau", "0+1i", "--gamma", "1,1,0,1"],
        vec!["nonsense"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = run(&["qpoly", "--n", "1,0,0,0", "--tau", "0+1i", "--tol", "band=-1"]);
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "usage");
}

#[test]
fn scan_of_2000_is_real_everywhere() {
    let out = run(&["scan", "--n", "2,0,0,0", "--b", "0.5:2:31", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 31);
    assert!(rows.iter().all(|r| &r[1] == "real_distinct"));
}

#[test]
fn failed_expectation_exits_with_two() {
    // A gap threshold this coarse merges distinct roots.
    let out = run(&["scan", "--n", "2,0,0,0", "--b", "1:1:1", "--tol", "tol_gap=0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json_of(&out);
    assert_eq!(v["summary"]["pass"], false);
    assert_eq!(v["tolerances"]["tol_gap"], 0.5);
}

#[test]
fn lame_bands_sit_at_half_period_values() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = run(&[
        "bands",
        "--n",
        "1,0,0,0",
        "--tau",
        "0+1i",
        "--E",
        "-8:4:401",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let edges: Vec<f64> = v["result"]["edges"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    let e = Lattice::new(Complex64::new(0.0, 1.0), 1e-14).unwrap().e();
    assert_eq!(edges.len(), 2);
    assert!((edges[0] - e[1].re).abs() < 1e-6);
    assert!((edges[1] - e[2].re).abs() < 1e-6);
    assert_eq!(v["result"]["bands"][0]["lo"], "-inf");
    assert_eq!(v["summary"]["truncated_hi"], true);
    let text = std::fs::read_to_string(trace).unwrap();
    assert_eq!(text.lines().count(), 402);
    assert!(text.starts_with("E,delta1\n"));
}

#[test]
fn unitary_grid_on_square_torus_is_empty() {
    let out = run(&[
        "unitary", "--n", "2,0,0,0", "--tau", "0+1i", "--re", "-6:6:5", "--im", "-2:2:3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["summary"]["points"], 15);
    assert_eq!(v["summary"]["unitary"], 0);
    assert_eq!(v["summary"]["expect_none"], true);
}

#[test]
fn premodular_operations() {
    let out = run(&["premodular", "--op", "boundary-scan", "--n", "2", "--grid", "6", "--per-piece", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["summary"]["pass"], true);
    assert_eq!(v["result"].as_array().unwrap().len(), 24);

    let out = run(&["premodular", "--op", "zero-find", "--n", "2", "--r", "0.15", "--s", "0.15"]);
    let v = json_of(&out);
    assert_eq!(v["summary"]["triangle"], 3);
    assert_eq!(v["summary"]["zeros_in_f0"].as_array().unwrap().len(), 1);

    let out = run(&[
        "premodular", "--op", "transform", "--n", "2", "--r", "0.2", "--s", "0.3", "--tau", "0.1+1.1i",
        "--gamma", "1,-1,0,1",
    ]);
    assert_eq!(out.status.code(), Some(0));

    let out = run(&[
        "premodular", "--op", "heatmap", "--n", "1", "--r", "0.3", "--s", "0.3", "--re", "0:1:4", "--im",
        "0.5:1.5:3", "--format", "csv",
    ]);
    assert_eq!(csv_rows(&out).len(), 12);
}

#[test]
fn output_is_deterministic_and_can_go_to_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let sum = dir.path().join("a.json");
    for p in [&a, &b] {
        let out = run(&[
            "premodular", "--op", "zero-find", "--n", "1", "--r", "0.3", "--s", "0.3", "--random-seeds", "4",
            "--seed", "9", "--format", "csv", "--output", p.to_str().unwrap(), "--summary",
            sum.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty() && out.stderr.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(sum).unwrap()).unwrap();
    assert_eq!(v["summary"]["runs"], 29);
}
