use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

fn hrlp(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hrlp")).args(args).current_dir(cwd).output().unwrap()
}

fn ok(args: &[&str], cwd: &Path) {
    let out = hrlp(args, cwd);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn synth(cwd: &Path) {
    ok(&["synth", "--out", "data", "--routes", "6", "--synth-seed", "4"], cwd);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d);
    let code = |args: &[&str]| hrlp(args, d).status.code();
    assert_eq!(code(&["route", "--method", "tsp", "--in", "data", "--out", "r.json"]), Some(0));
    assert_eq!(code(&["route", "--method", "hrlp", "--in", "data", "--out", "r.json"]), Some(2));
    assert_eq!(code(&["route", "--method", "hrlp", "--theta", "0,1,1,1,1", "--in", "data", "--out", "r.json"]), Some(2));
    assert_eq!(code(&["route", "--method", "tsp", "--in", "missing", "--out", "r.json"]), Some(1));
    assert_eq!(code(&["frobnicate"]), Some(2));

    std::fs::write(d.join("cfg.json"), r#"{"bo": {"n_init": 50, "n_total": 10}}"#).unwrap();
    assert_eq!(code(&["--config", "cfg.json", "train", "--in", "data", "--out", "t.json"]), Some(2));
    std::fs::write(d.join("cfg.json"), r#"{"unknown_key": 1}"#).unwrap();
    assert_eq!(code(&["--config", "cfg.json", "route", "--method", "tsp", "--in", "data", "--out", "r.json"]), Some(2));

    std::fs::write(d.join("bad.json"), r#"{"RouteID_syn_0000": ["nope"]}"#).unwrap();
    assert_eq!(code(&["score", "--candidate", "bad.json", "--in", "data", "--out", "s.csv"]), Some(1));
}

#[test]
fn routed_benchmark_scores_zero() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d);
    ok(&["route", "--method", "hrlp", "--theta", "10,1,1,1,1", "--in", "data", "--out", "r.json"], d);
    let routed: BTreeMap<String, Vec<String>> = serde_json::from_str(&std::fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(routed.len(), 6);

    ok(&["score", "--benchmark", "r.json", "--candidate", "r.json", "--in", "data", "--out", "self.csv"], d);
    let mut rdr = csv::Reader::from_path(d.join("self.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["route_id", "sd", "erp_n", "erp_e", "route_score"]);
    let scores: Vec<f64> = rdr.records().map(|r| r.unwrap()[4].parse().unwrap()).collect();
    assert_eq!(scores, vec![0.0; 6]);

    // the recorded sequences in their native layout score zero too
    ok(&["score", "--benchmark", "data/actual_sequences.json", "--candidate", "data/actual_sequences.json", "--in", "data", "--out", "b.csv"], d);
}

#[test]
fn manifests_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d);
    for out in ["a.json", "b.json"] {
        ok(&["route", "--method", "tsp", "--in", "data", "--out", out, "--manifest", &format!("{out}.m")], d);
    }
    let read = |p: &str| -> serde_json::Value { serde_json::from_str(&std::fs::read_to_string(d.join(p)).unwrap()).unwrap() };
    let (a, b) = (read("a.json.m"), read("b.json.m"));
    assert_eq!(a["inputs"], b["inputs"]);
    assert_eq!(a["inputs"].as_array().unwrap().len(), 4);
    assert_eq!(a["seeds"], b["seeds"]);
    assert_eq!(a["config_hash"].as_str().unwrap().len(), 64);
    // only the output path differs, and it is part of the hashed arguments
    assert_ne!(a["config_hash"], b["config_hash"]);

    ok(&["route", "--method", "tsp", "--in", "data", "--out", "a.json", "--manifest", "again.m"], d);
    assert_eq!(read("again.m"), a);
}

#[test]
fn eval_summary_has_one_row_per_method_and_scope() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["synth", "--out", "data", "--routes", "10", "--stations", "2", "--synth-seed", "9"], d);
    ok(&["eval", "--in", "data", "--split", "all", "--theta", "10,1,1,1,1", "--out", "s.csv", "--summary", "sum.csv"], d);
    let mut rdr = csv::Reader::from_path(d.join("sum.csv")).unwrap();
    let rows: Vec<(String, String)> = rdr.records().map(|r| {
        let r = r.unwrap();
        (r[0].to_owned(), r[1].to_owned())
    }).collect();
    assert_eq!(
        rows,
        [("all", "tsp"), ("all", "hrlp"), ("SYN1", "tsp"), ("SYN1", "hrlp"), ("SYN2", "tsp"), ("SYN2", "hrlp")]
            .map(|(a, b)| (a.to_owned(), b.to_owned()))
    );
}

#[test]
fn sweep_and_analyze_run_on_a_small_suite() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["synth", "--out", "data", "--routes", "10", "--synth-seed", "2"], d);
    ok(&["sweep-h", "--in", "data", "--hs", "1,2", "--n0", "3", "--iters", "5", "--out", "sweep.csv"], d);
    let text = std::fs::read_to_string(d.join("sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);

    ok(&["eval", "--in", "data", "--split", "all", "--out", "s.csv"], d);
    ok(&["analyze", "--scores", "s.csv", "--method", "tsp", "--in", "data", "--out", "report.json", "--tables", "tables"], d);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["n_routes"], 10);
    assert!(d.join("tables/features.csv").is_file());
}
