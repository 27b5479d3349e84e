//! End-to-end checks of the command-line interface: exit codes, JSON
//! reports, and determinism across thread counts.

use std::path::PathBuf;
use std::process::{Command, Output};

fn natred(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_natred"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("natred-cli-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn verify_tables_cp3_exits_zero_with_four_rows() {
    let out = tmp("verify.json");
    let result = natred(&[
        "verify-tables",
        "--space",
        "cp3",
        "--sweep-samples",
        "500",
        "--json",
        out.to_str().unwrap(),
    ]);
    assert!(
        result.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&result.stdout),
        String::from_utf8_lossy(&result.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["rows"].as_array().unwrap().len(), 4);
    assert_eq!(report["all_pass"], true);
    std::fs::remove_file(out).ok();
}

#[test]
fn spectra_prints_the_fiber_eigenvalues() {
    let result = natred(&["spectra", "--space", "s3s3", "--direction", "e1"]);
    assert!(result.status.success());
    let text = String::from_utf8_lossy(&result.stdout);
    assert!(
        text.contains("+0.750000000000 with multiplicity 2"),
        "{text}"
    );
    assert!(
        text.contains("+0.083333333333 with multiplicity 2"),
        "{text}"
    );
}

#[test]
fn search_reports_empty_dimension_four() {
    let result = natred(&[
        "search",
        "--space",
        "cp3",
        "--dim",
        "4",
        "--samples",
        "2000",
        "--seed",
        "7",
    ]);
    assert!(result.status.success());
    let text = String::from_utf8_lossy(&result.stdout);
    assert!(
        text.contains("0 totally geodesic subspaces found"),
        "{text}"
    );
    assert!(text.contains("min rejection residual"), "{text}");
}

#[test]
fn search_is_deterministic_across_thread_counts() {
    let out2 = tmp("search2.json");
    let out4 = tmp("search4.json");
    for (threads, path) in [("2", &out2), ("4", &out4)] {
        let result = natred(&[
            "search",
            "--space",
            "flag",
            "--dim",
            "3",
            "--samples",
            "3000",
            "--seed",
            "42",
            "--threads",
            threads,
            "--json",
            path.to_str().unwrap(),
        ]);
        assert!(result.status.success());
    }
    let a = std::fs::read(&out2).unwrap();
    let b = std::fs::read(&out4).unwrap();
    assert_eq!(a, b, "reports must be byte-identical across thread counts");
    std::fs::remove_file(out2).ok();
    std::fs::remove_file(out4).ok();
}

#[test]
fn check_subspace_inline_verdicts() {
    // the Lagrangian subspace passes
    let result = natred(&["check-subspace", "--space", "cp3", "--inline", "e1; e3; e5"]);
    assert!(result.status.success());
    assert!(String::from_utf8_lossy(&result.stdout).contains("is totally geodesic"));
    // a curvature-violating subspace exits 1
    let result = natred(&["check-subspace", "--space", "cp3", "--inline", "e1; e2; e3"]);
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stdout).contains("NOT totally geodesic"));
    // radical coefficients parse
    let result = natred(&[
        "check-subspace",
        "--space",
        "cp3",
        "--inline",
        "sqrt2*e1 + sqrt3*e3; sqrt2*e2 + sqrt3*e4",
    ]);
    assert!(result.status.success());
}

#[test]
fn check_subspace_from_vector_file() {
    let path = tmp("vectors.json");
    std::fs::write(&path, "[[1,0,0,0,0,0],[0,0,1,0,0,0],[0,0,0,0,1,0]]").unwrap();
    let result = natred(&[
        "check-subspace",
        "--space",
        "flag",
        "--vectors",
        path.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    std::fs::remove_file(path).ok();
}

#[test]
fn geodesic_emits_samples_and_interval() {
    let out = tmp("geo.json");
    let result = natred(&[
        "geodesic",
        "--space",
        "cp3",
        "--cone",
        "--a",
        "1.0",
        "--v",
        "0e1",
        "--tau",
        "1.0",
        "--json",
        out.to_str().unwrap(),
    ]);
    // a = 1, v = 0: interval (−1, ∞)
    assert!(
        result.status.success(),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["interval"][0], -1.0);
    std::fs::remove_file(out).ok();
}

#[test]
fn cone_report_is_clean_for_cp3() {
    let result = natred(&["cone", "--space", "cp3"]);
    assert!(
        result.status.success(),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );
    let text = String::from_utf8_lossy(&result.stdout);
    assert!(text.contains("coassociative"), "{text}");
    assert!(text.contains("(clean)"), "{text}");
}

#[test]
fn input_errors_exit_two() {
    let result = natred(&["spectra", "--space", "nope", "--direction", "e1"]);
    assert_eq!(result.status.code(), Some(2));
    let result = natred(&["check-subspace", "--space", "cp3", "--inline", "x9"]);
    assert_eq!(result.status.code(), Some(2));
    let result = natred(&[
        "geodesic", "--space", "cp3", "--cone", "--a", "0", "--v", "0e1",
    ]);
    assert_eq!(result.status.code(), Some(2), "zero velocity");
}
