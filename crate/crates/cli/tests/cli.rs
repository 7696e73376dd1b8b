//! End-to-end checks of the `avgmdp` binary.

use std::path::Path;
use std::process::{Command, Output};

use avgmdp::iterate::Algorithm;
use avgmdp::schedule::Schedule;
use avgmdp::trace_io::{parse_iterates_csv, parse_metrics_csv, rebuild_trace, TraceRow};
use avgmdp::{make_unichain_family, Mdp, ValueVector};
use serde_json::Value;
use tempfile::TempDir;

/// Runs the binary with whitespace-separated arguments.
fn avgmdp(cmd: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_avgmdp"))
        .args(cmd.split_whitespace())
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn rows(o: &Output) -> Vec<TraceRow> {
    parse_metrics_csv(&stdout(o)).unwrap()
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

const BRANCH: &str = r#"{
  "n_states": 3,
  "n_actions": 2,
  "transitions": [
    [[1, 0, 0], [1, 0, 0]],
    [[0, 1, 0], [0, 1, 0]],
    [[1, 0, 0], [0, 1, 0]]
  ],
  "rewards": [[0, 0], [1, 1], [0, 0]]
}"#;

#[test]
fn anchored_run_on_unichain_family() {
    let o = avgmdp("run --family unichain --n 16 --algo anc-vi --iters 14 --quiet");
    assert!(o.status.success());
    let rows = rows(&o);
    assert_eq!(rows.len(), 15);
    let e1 = rows[1].bellman_sup_err.unwrap();
    assert!((0.25..=2.0).contains(&e1), "{e1}");
    for r in &rows[1..] {
        assert!(r.lower_bound.unwrap() <= r.bellman_sup_err.unwrap() + 1e-12);
        assert!(r.bellman_sup_err.unwrap() <= r.upper_bound.unwrap() + 1e-12);
    }
    assert!(o.stderr.is_empty());
}

#[test]
fn vi_is_exact_on_multichain_family() {
    let o = avgmdp("run --family multichain --n 16 --algo vi --iters 14 --quiet");
    assert!(o.status.success());
    let rows = rows(&o);
    assert!(rows[0].normalized_err.is_none());
    for r in &rows[1..] {
        let expected = 1.0 / r.k as f64;
        assert!(
            (r.normalized_err.unwrap() - expected).abs() < 1e-10,
            "k = {}",
            r.k
        );
    }
}

#[test]
fn zero_iterations_give_one_row() {
    let o = avgmdp("run --family unichain --n 5 --iters 0 --quiet");
    assert!(o.status.success());
    let rows = rows(&o);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].k, 0);
}

#[test]
fn run_writes_files_and_summary() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("trace.csv");
    let it = dir.path().join("iterates.csv");
    let o = avgmdp(&format!("run --random random_weakly_comm --n 6 --actions 3 --seed 4 --algo rx-vi --v0 random:9 --iters 40 --out {} --iterates {}", path_arg(&csv), path_arg(&it)));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = json(&o);
    assert_eq!(summary["algorithm"], "rx-vi");
    assert_eq!(summary["final"]["k"], 40);
    assert!(summary["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert!(summary["class"].is_string());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(!text.contains('\r'));
    assert_eq!(parse_metrics_csv(&text).unwrap().len(), 41);
    assert!(std::fs::read_to_string(&it)
        .unwrap()
        .starts_with("k,v_0,v_1"));
}

#[test]
fn metrics_are_recomputable_from_iterates() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("trace.csv");
    let it = dir.path().join("iterates.csv");
    let o = avgmdp(&format!("run --family unichain --n 7 --algo anc-vi --iters 30 --v0 const:0.25 --out {} --iterates {} --quiet", path_arg(&csv), path_arg(&it)));
    assert!(o.status.success());
    let stored = parse_metrics_csv(&std::fs::read_to_string(&csv).unwrap()).unwrap();
    let iterates = parse_iterates_csv(&std::fs::read_to_string(&it).unwrap()).unwrap();
    let v0 = ValueVector::constant(7, 0.25);
    let (m, sol) = make_unichain_family(7, Some(&v0)).unwrap();
    let mut trace = rebuild_trace(&m, Algorithm::AncVi, &Schedule::Anchor, None, iterates).unwrap();
    trace.attach_metrics(&m, &sol).unwrap();
    let close = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(x), Some(y)) => (x - y).abs() <= 1e-12,
        (None, None) => true,
        _ => false,
    };
    for (row, rec) in stored.iter().zip(&trace.records) {
        let again = TraceRow::from_record(rec);
        assert!(close(row.lambda, again.lambda));
        assert!(close(row.bellman_sup_err, again.bellman_sup_err));
        assert!(close(row.bellman_span, again.bellman_span));
        assert!(close(row.normalized_err, again.normalized_err));
        assert!(close(row.policy_err, again.policy_err));
    }
}

#[test]
fn relative_run_reports_normalization() {
    let o = avgmdp("run --random random_unichain --n 5 --algo anc-rvi --f mid --iters 20 --quiet");
    assert!(o.status.success());
    assert!(rows(&o).iter().all(|r| r.f_value.is_some()));
    let o = avgmdp("run --family unichain --n 5 --algo vi --f h:0");
    assert_eq!(o.status.code(), Some(2));
    let o = avgmdp("run --family unichain --n 5 --algo anc-rvi --f h:9");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gen_is_deterministic() {
    for kind in ["random_general", "random_unichain", "random_weakly_comm"] {
        let a = avgmdp(&format!("gen --kind {kind} --n 6 --actions 3 --seed 17"));
        let b = avgmdp(&format!("gen --kind {kind} --n 6 --actions 3 --seed 17"));
        let c = avgmdp(&format!("gen --kind {kind} --n 6 --actions 3 --seed 18"));
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
        assert_ne!(a.stdout, c.stdout);
        Mdp::from_json(&stdout(&a)).unwrap();
    }
    let one = avgmdp("gen --kind random_general --n 1 --actions 1");
    let v = json(&one);
    assert_eq!(v["transitions"][0][0][0].as_f64(), Some(1.0));
}

#[test]
fn gen_rejects_bad_sizes() {
    assert_eq!(avgmdp("gen --n 0").status.code(), Some(2));
    assert_eq!(avgmdp("gen --n 3 --actions 0").status.code(), Some(2));
    assert_eq!(avgmdp("gen --kind nope --n 3").status.code(), Some(2));
}

#[test]
fn generated_unichain_instances_classify_as_unichain() {
    for seed in 0..20 {
        let dir = TempDir::new().unwrap();
        let f = dir.path().join("m.json");
        let o = avgmdp(&format!(
            "gen --kind random_unichain --n 6 --seed {seed} --out {}",
            path_arg(&f)
        ));
        assert!(o.status.success());
        let c = json(&avgmdp(&format!("classify --mdp {}", path_arg(&f))));
        assert_eq!(c["class"], "unichain");
    }
}

#[test]
fn solve_reports_solution_and_constants() {
    let o = avgmdp("solve --family unichain --n 4");
    assert!(o.status.success());
    let v = json(&o);
    for g in v["gain"].as_array().unwrap() {
        assert!((g.as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-10);
    }

    let dir = TempDir::new().unwrap();
    let f = dir.path().join("branch.json");
    std::fs::write(&f, BRANCH).unwrap();
    let v = json(&avgmdp(&format!("solve --mdp {}", path_arg(&f))));
    assert_eq!(v["epsilon"].as_f64(), Some(1.0));
    assert_eq!(v["class"], "multichain");
    // canonical bias [0, 1/2, -1/2]: d = 1/2, K = (2 + 0 + 8 + 2) / 1
    assert_eq!(v["k_anc"].as_f64(), Some(12.0));

    let single = r#"{"n_states":1,"n_actions":1,"transitions":[[[1.0]]],"rewards":[[0.7]]}"#;
    std::fs::write(&f, single).unwrap();
    let v = json(&avgmdp(&format!("solve --mdp {}", path_arg(&f))));
    assert_eq!(v["gain"][0].as_f64(), Some(0.7));
    assert_eq!(v["bias"][0].as_f64(), Some(0.0));
    assert_eq!(v["epsilon"], "inf");
}

#[test]
fn invalid_mdp_files_exit_3() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("bad.json");
    let bad =
        r#"{"n_states":2,"n_actions":1,"transitions":[[[0.5,0.6]],[[1,0]]],"rewards":[[0],[0]]}"#;
    std::fs::write(&f, bad).unwrap();
    for cmd in ["run", "solve", "classify"] {
        let o = avgmdp(&format!("{cmd} --mdp {}", path_arg(&f)));
        assert_eq!(o.status.code(), Some(3), "{cmd}");
        assert!(!o.stderr.is_empty());
    }
    std::fs::write(&f, "not json").unwrap();
    assert_eq!(
        avgmdp(&format!("classify --mdp {}", path_arg(&f)))
            .status
            .code(),
        Some(3)
    );
    let missing = dir.path().join("missing.json");
    assert_eq!(
        avgmdp(&format!("classify --mdp {}", path_arg(&missing)))
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_anchored_certificate_on_random_instances() {
    let o = avgmdp("verify --cert anc-vi --random random_weakly_comm --n 8 --actions 3 --count 50 --v0 random --iters 500");
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["pass"], true);
    assert_eq!(v["instances"], 50);
    let ineq = &v["inequalities"][0];
    assert!(ineq["min_slack"].as_f64().unwrap() >= 0.0);
    assert!(ineq["k_min"].as_u64().unwrap() >= 1);
    assert_eq!(ineq["k_max"], 500);
}

#[test]
fn verify_negative_control_names_the_inequality() {
    let o = avgmdp("verify --cert anc-vi --lambda const:0.99 --family unichain --n 16");
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["pass"], false);
    assert_eq!(v["inequalities"][0]["name"], "anc-vi bellman envelope");
    let first = &v["inequalities"][0]["violations"][0];
    assert!(first["lhs"].as_f64().unwrap() > first["rhs"].as_f64().unwrap());
    assert!(String::from_utf8_lossy(&o.stderr).contains("anc-vi bellman envelope"));
}

#[test]
fn verify_other_certificates() {
    let o = avgmdp("verify --cert coefficients --quiet");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["inequalities"][1]["checked"], 200);
    for cert in ["rx-vi", "vi-normalized", "policy-error", "rvi"] {
        let o = avgmdp(&format!(
            "verify --cert {cert} --random random_unichain --n 5 --count 3 --iters 200 --quiet"
        ));
        assert_eq!(o.status.code(), Some(0), "{cert}");
    }
    let o = avgmdp("verify --cert lower-bound --family multichain --n 10 --quiet");
    assert_eq!(o.status.code(), Some(0));
    let o = avgmdp("verify --cert lower-bound --random random_general --n 4");
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(
        avgmdp("verify --cert bogus --family unichain --n 4")
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn lower_bound_shortcut() {
    for family in ["unichain", "multichain"] {
        let o = avgmdp(&format!("lower-bound --family {family} --n 12"));
        assert_eq!(o.status.code(), Some(0), "{family}");
        let v = json(&o);
        assert_eq!(v["holds"], true);
        assert_eq!(v["algorithms"].as_array().unwrap().len(), 3);
        assert_eq!(v["dist0"].as_f64(), Some(0.5));
    }
    assert_eq!(
        avgmdp("lower-bound --family unichain --n 2").status.code(),
        Some(2)
    );
}

#[test]
fn config_errors_exit_2() {
    assert_eq!(avgmdp("run").status.code(), Some(2));
    assert_eq!(
        avgmdp("run --family unichain --n 5 --lambda const:1.5")
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        avgmdp("run --family unichain --n 5 --v0 const:x")
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        avgmdp("run --family unichain --n 5 --algo pi")
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        avgmdp("run --family multichain --n 3").status.code(),
        Some(2)
    );
}
