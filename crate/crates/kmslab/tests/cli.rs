use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const DUMBBELL: &str = r#"{"vertices": ["v", "w"], "edges": [
  {"id": "v0", "range": "v", "source": "v"},
  {"id": "v1", "range": "v", "source": "v"},
  {"id": "c", "range": "v", "source": "w"},
  {"id": "w0", "range": "w", "source": "w"},
  {"id": "w1", "range": "w", "source": "w"},
  {"id": "w2", "range": "w", "source": "w"}
]}"#;

fn kmslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kmslab")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn report(out: &Output) -> Value {
    assert!(out.status.code().is_some(), "{out:?}");
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn close(v: &Value, x: f64, tol: f64) -> bool {
    (v.as_f64().unwrap() - x).abs() <= tol
}

#[test]
fn analyze_dumbbell() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.json", DUMBBELL);
    let out = kmslab(&["analyze", "--graph", g.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(close(&r["results"]["beta_c"], 3f64.ln(), 1e-12));
    assert!(close(&r["results"]["beta_l"], 2f64.ln(), 1e-12));
    assert_eq!(r["results"]["sinks"], Value::Array(vec![]));
}

#[test]
fn analyze_single_loop_and_acyclic() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "loop.json", r#"{"vertices": ["x"], "edges": [{"range": "x", "source": "x"}]}"#);
    let r = report(&kmslab(&["analyze", "--graph", g.to_str().unwrap()]));
    assert!(close(&r["results"]["beta_c"], 0.0, 1e-12));
    assert!(close(&r["results"]["beta_l"], 0.0, 1e-12));

    let g = write(dir.path(), "line.json", r#"{"vertices": ["a", "b"], "edges": [{"range": "a", "source": "b"}]}"#);
    let out = kmslab(&["analyze", "--graph", g.to_str().unwrap()]);
    let r = report(&out);
    assert_eq!(r["results"]["rho"]["has_cycle"], Value::Bool(false));
    let warnings = r["results"]["warnings"].as_array().unwrap();
    assert!(warnings.iter().any(|w| w.as_str().unwrap().contains("no cycle")));
    assert!(warnings.iter().any(|w| w.as_str().unwrap().contains("emit no edges")));
}

#[test]
fn malformed_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "bad.json", r#"{"vertices": ["v"], "edges": [{"range": "v"}]}"#);
    assert_eq!(kmslab(&["analyze", "--graph", g.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(kmslab(&["analyze", "--graph", "/nonexistent/graph.json"]).status.code(), Some(2));
    let g = write(dir.path(), "g.json", DUMBBELL);
    assert_eq!(kmslab(&["state", "--graph", g.to_str().unwrap(), "--beta", "warm"]).status.code(), Some(2));
    assert_eq!(kmslab(&["analyze"]).status.code(), Some(2));
}

#[test]
fn state_point_mass_at_v() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.json", DUMBBELL);
    let els = write(
        dir.path(),
        "els.json",
        r#"[{"l": 0, "mu": {"vertex": "v"}, "m": 0, "nu": {"vertex": "v"}},
            {"l": 0, "mu": {"vertex": "w"}, "m": 0, "nu": {"vertex": "w"}},
            {"l": 1, "mu": ["v0"], "m": 1, "nu": ["v0"]},
            {"l": 1, "mu": ["v0"], "m": 0, "nu": {"vertex": "v"}},
            {"coeff": 3, "l": 1, "mu": ["v0", "v1"], "m": 1, "nu": ["v0", "v1"]},
            {"l": 1, "mu": ["v0", "v1"], "m": 1, "nu": ["v1", "v1"]}]"#,
    );
    let out = kmslab(&[
        "state", "--graph", g.to_str().unwrap(), "--beta", "ln:6", "--epsilon", "point:v", "--elements", els.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    // ε = δ_v / f_β(v) with f_β(v) = 3/2, μ(Z(v)) = ε_v / (1 − 2/6) = 1
    let table = r["results"]["table"].as_array().unwrap();
    // μ(Z(v1)) = ε(Z(v1)) + e^{−β} μ(Z(v)) = 2/9 + 1/6 under uniform splitting
    let expect = [1.0, 0.0, 1.0 / 6.0, 0.0, 3.0 * (1.0 / 6.0) * (7.0 / 18.0), 0.0];
    assert_eq!(table.len(), expect.len());
    for (row, e) in table.iter().zip(expect) {
        assert!(close(&row["value"], e, 1e-12), "{row} vs {e}");
    }
    assert!(close(&r["results"]["cp_gap"][0], 2.0 / 3.0, 1e-12));
    assert!(close(&r["results"]["cp_gap"][1], 0.0, 1e-12));
    assert_eq!(r["pass"], Value::Bool(true));
    assert!(r["results"]["notes"].as_array().unwrap().len() == 1);
}

#[test]
fn state_accepts_measure_files() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.json", DUMBBELL);
    let eps = write(
        dir.path(),
        "eps.json",
        r#"{"depth": 2, "weights": [{"word": ["v0", "v0"], "mass": 0.2}, {"word": ["w1", "w2"], "mass": 0.1}]}"#,
    );
    let out = kmslab(&["state", "--graph", g.to_str().unwrap(), "--beta", "2.0", "--epsilon", eps.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert!(close(&r["results"]["integral_f_beta"], 1.0, 1e-12));
}

#[test]
fn subcritical_and_sinks_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.json", DUMBBELL);
    let gp = g.to_str().unwrap();
    assert_eq!(kmslab(&["state", "--graph", gp, "--beta", "1.0"]).status.code(), Some(3));
    assert_eq!(kmslab(&["verify", "--graph", gp, "--beta", "ln:3"]).status.code(), Some(3));
    let just_above = format!("{}", 3f64.ln() + 1e-15);
    let out = kmslab(&["verify", "--graph", gp, "--beta", &just_above]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("β_c"));
    let s = write(dir.path(), "sink.json", r#"{"vertices": ["a", "b"], "edges": [{"range": "a", "source": "a"}, {"range": "b", "source": "a"}]}"#);
    assert_eq!(kmslab(&["state", "--graph", s.to_str().unwrap(), "--beta", "3"]).status.code(), Some(3));
}

#[test]
fn verify_is_green_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.json", DUMBBELL);
    let gp = g.to_str().unwrap();
    let mut reports = Vec::new();
    for (i, threads) in ["1", "3"].iter().enumerate() {
        let out_path = dir.path().join(format!("r{i}.json"));
        let out = Command::new(env!("CARGO_BIN_EXE_kmslab"))
            .args(["verify", "--graph", gp, "--beta", "ln:6", "--seed", "42", "--samples", "60", "--fock-samples", "12"])
            .args(["--positivity-samples", "3", "--json", out_path.to_str().unwrap()])
            .env("KMSLAB_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
        reports.push(std::fs::read(&out_path).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    let r: Value = serde_json::from_slice(&reports[0]).unwrap();
    assert_eq!(r["pass"], Value::Bool(true));
    assert!(r.get("wall_time_ms").is_none());
}

#[test]
fn torus_example() {
    let out = kmslab(&["example", "torus", "--matrix", "2", "--beta", "ln:4", "--max-k", "2", "--radius", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(close(&r["results"]["unit"][0], 1.0, 1e-12));
    assert!(close(&r["results"]["f_beta"], 2.0, 1e-12));
    assert_eq!(r["results"]["table"].as_array().unwrap().len(), 7 * 3);
    let out = kmslab(&["example", "torus", "--matrix", "[[2,1],[0,2]]", "--beta", "2", "--radius", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(kmslab(&["example", "torus", "--matrix", "2", "--beta", "ln:2"]).status.code(), Some(3));
    assert_eq!(kmslab(&["example", "torus", "--matrix", "[[1,0],[0,1]]", "--beta", "2"]).status.code(), Some(2));
}
