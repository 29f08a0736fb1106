use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn fep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn csv_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn estimate_four_rows() {
    let f = csv_file("x,y\n1,1\n2,3\n3,2\n4,4\n");
    let out = fep(&["estimate", "--input", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["command"], "estimate");
    let rho = r["results"]["rho_n"].as_f64().unwrap();
    assert!((rho - 0.8).abs() < 1e-12);
    let ci = r["results"]["ci95"].as_array().unwrap();
    assert!(ci[0].as_f64().unwrap() < rho && rho < ci[1].as_f64().unwrap());
    let plug = r["results"]["sigma2_hat"].as_f64().unwrap();
    let pipe = r["results"]["sigma2_hat_pipeline"].as_f64().unwrap();
    assert!((plug - pipe).abs() <= 1e-9 * plug);
    // n = 4 is flagged for the z-test
    assert!(!r["results"]["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn estimate_reports_bad_line() {
    let f = csv_file("1,1\n2,3\n3,x\n4,4\n");
    let out = fep(&["estimate", "--input", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn estimate_constant_column() {
    let f = csv_file("1,5\n2,5\n3,5\n");
    let out = fep(&["estimate", "--input", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerated marginal"));
}

#[test]
fn variance_gaussian() {
    let out = fep(&["variance", "--law", "gaussian", "--rho", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert!((r["results"]["sigma2"].as_f64().unwrap() - 0.5625).abs() < 1e-12);
    assert!(r["results"]["abs_difference"].as_f64().unwrap() < 1e-9);
    assert_eq!(r["checks"][0]["pass"], true);
}

#[test]
fn variance_independent_normals() {
    let out = fep(&[
        "variance", "--law", "independent", "--mx", "standard_normal", "--my", "standard_normal",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["results"]["sigma2"].as_f64().unwrap(), 1.0);
}

#[test]
fn variance_mixture_json() {
    let mix = r#"{"components":[{"kind":"gaussian","rho":0.6},{"kind":"independent","x":"exponential_std","y":"rademacher"}],"weights":[0.5,0.5]}"#;
    let out = fep(&["variance", "--law", "mixture", "--mixture", mix]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert!((r["results"]["rho"].as_f64().unwrap() - 0.3).abs() < 1e-12);
}

#[test]
fn variance_rejects_affine_law() {
    let out = fep(&["variance", "--law", "gaussian", "--rho", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("affine dependence, asymptotics excluded"));
}

#[test]
fn simulate_needs_enough_reps() {
    let out = fep(&["simulate", "--law", "gaussian", "--rho", "0.5", "--reps", "50"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("reps ≥ 100 required"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(fep(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(fep(&["simulate", "--law", "gaussian"]).status.code(), Some(2));
}

#[test]
fn simulate_gaussian_band() {
    let out = fep(&[
        "simulate", "--law", "gaussian", "--rho", "0.5", "--n", "2000", "--reps", "5000", "--seed", "42",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let v = r["results"]["empirical_variance"].as_f64().unwrap();
    assert!((0.506..=0.619).contains(&v), "{v}");
    assert_eq!(r["seed"], 42);
    let keys: Vec<&str> = r.as_object().unwrap().keys().map(String::as_str).collect();
    for k in ["command", "config", "results", "checks", "seed"] {
        assert!(keys.contains(&k));
    }
    for c in r["checks"].as_array().unwrap() {
        assert!(c["threshold"].is_number());
    }
}

#[test]
fn simulate_thread_budget_does_not_change_results() {
    let run = |threads: &str| {
        let out = fep(&[
            "simulate", "--law", "independent", "--mx", "uniform_std", "--my", "exponential_std",
            "--n", "300", "--reps", "400", "--seed", "5", "--threads", threads,
        ]);
        json(&out)["results"].clone()
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn lemma1_csv_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lemma1.csv");
    let out = fep(&[
        "lemma1", "--law", "gaussian", "--rho", "0.5", "--n", "200", "--reps", "400",
        "--functions", "pi1,pi2", "--format", "csv", "--output", path.to_str().unwrap(),
    ]);
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("kind,name,value,threshold,pass\n"));
    assert!(text.contains("check,covariance_max_abs_deviation,"));
    assert!(text.contains("result,gamma.0.1,0.5"));
}

#[test]
fn check_is_deterministic() {
    let a = fep(&["check", "--seed", "42"]);
    let b = fep(&["check", "--seed", "42"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let stderr = String::from_utf8_lossy(&a.stderr);
    assert_eq!(stderr.lines().filter(|l| l.contains(": PASS")).count(), 7);
}
