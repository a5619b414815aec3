use std::path::PathBuf;
use std::process::{Command, Output};

fn qpv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpv")).args(args).env_remove("QPV_SEED").output().expect("spawn qpv")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qpv-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write_scenario(name: &str, json: &str) -> String {
    let p = scratch(name);
    std::fs::write(&p, json).unwrap();
    p.display().to_string()
}

#[test]
fn same_seed_gives_identical_files_across_worker_counts() {
    let a = scratch("det-a.csv");
    let b = scratch("det-b.csv");
    for (out, workers) in [(&a, "1"), (&b, "3")] {
        let o = qpv(&[
            "run", "--experiment", "pv-attack", "--trials", "2000", "--seed", "42", "--workers", workers, "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.code().is_some());
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!x.is_empty());
    assert_eq!(x, y);
}

#[test]
fn env_seed_is_the_fallback() {
    let with_flag = qpv(&["run", "--experiment", "pv-attack", "--trials", "300", "--seed", "7"]);
    let with_env = Command::new(env!("CARGO_BIN_EXE_qpv"))
        .args(["run", "--experiment", "pv-attack", "--trials", "300"])
        .env("QPV_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(with_flag.stdout, with_env.stdout);
    let other = qpv(&["run", "--experiment", "pv-attack", "--trials", "300", "--seed", "8"]);
    assert_ne!(with_flag.stdout, other.stdout);
}

#[test]
fn unknown_experiment_is_a_usage_error() {
    let o = qpv(&["run", "--experiment", "pv-nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_scenario_names_the_field() {
    let p = write_scenario("bad-q.json", r#"{"schema": 1, "auth": {"q": 0.5}}"#);
    let o = qpv(&["run", "--scenario", &p, "--experiment", "auth"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("auth"));

    let p = write_scenario("outside.json", r#"{"schema": 1, "layout": {"verifiers": [[0.0], [1.0]], "prover": [1.5]}}"#);
    let o = qpv(&["run", "--scenario", &p, "--experiment", "pv-honest"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("layout"));
}

#[test]
fn entanglement_under_no_pe_is_a_config_error() {
    let p = write_scenario("teleport.json", r#"{"schema": 1, "attack": "teleport"}"#);
    let o = qpv(&["run", "--scenario", &p, "--experiment", "pv-attack", "--trials", "5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_check_exits_one() {
    // The alternating pair is not 2-dominated; expecting it to be must fail.
    let p = write_scenario(
        "wrong-expectation.json",
        r#"{"schema": 1, "domination": {"codes": [], "pairs": [
            {"c": "10101010", "c_prime": "01010101", "lambda": 2, "expect_dominates": true}]}}"#,
    );
    let o = qpv(&["run", "--scenario", &p, "--experiment", "domination"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("check failed"));
}

#[test]
fn one_row_csv_has_two_lines() {
    let o = qpv(&["run", "--experiment", "pv-honest", "--trials", "20", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("experiment,metric,params,"));
}

#[test]
fn json_report_is_an_array_with_provenance() {
    let out = scratch("report.json");
    let o = qpv(&[
        "run", "--experiment", "cit-audit", "--trials", "10", "--seed", "3", "--format", "json", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<qpv_cli::ResultRow> = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(r.seed, 3);
        assert_eq!(r.version, qpv_cli::VERSION);
        assert_eq!(r.frequency, qpv_cli::round_sig(r.successes as f64 / r.trials as f64, 6));
        assert!(r.wall_time_s.is_none());
    }
}

#[test]
fn unwritable_output_names_the_path() {
    let o = qpv(&["run", "--experiment", "pv-honest", "--trials", "5", "--out", "/nonexistent-qpv-dir/x.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent-qpv-dir/x.csv"));
}
