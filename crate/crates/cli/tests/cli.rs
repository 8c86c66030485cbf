use std::process::{Command, Output};

fn frdlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frdlab"))
        .args(args)
        .env("FRDLAB_THREADS", "1")
        .output()
        .expect("frdlab runs")
}

#[test]
fn single_prints_the_three_decisions() {
    let out = frdlab(&[
        "single",
        "--voters",
        "15",
        "--candidates",
        "7",
        "--issues",
        "6",
        "--k",
        "3",
        "--alpha",
        "1",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for side in ["dd", "rd", "frd"] {
        assert_eq!(v[side]["outcome"].as_str().unwrap().len(), 6);
    }
    assert_eq!(v["committee"].as_array().unwrap().len(), 3);
    assert_eq!(v["agreement_frd"], v["coverage"]);
    assert_eq!(
        out.stdout,
        frdlab(&[
            "single",
            "--voters",
            "15",
            "--candidates",
            "7",
            "--issues",
            "6",
            "--k",
            "3",
            "--alpha",
            "1"
        ])
        .stdout
    );
}

#[test]
fn grid_writes_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"n_voters": 9, "n_candidates": 6, "n_issues": 5, "k": [1, 3], "rule": ["av", "kmedian"], "trials": 2, "master_seed": 3}"#,
    )
    .unwrap();
    let (csv, svg) = (dir.path().join("out.csv"), dir.path().join("out.svg"));
    let out = frdlab(&[
        "grid",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
        "--plot",
        svg.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 1 + 2 * 2 * 2);
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn spec_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.json");
    std::fs::write(
        &spec,
        r#"{"n_voters": 9, "n_candidates": 6, "n_issues": 5, "k": 4, "rule": "av", "trials": 1, "master_seed": 0}"#,
    )
    .unwrap();
    assert_eq!(
        frdlab(&["grid", "--spec", spec.to_str().unwrap()]).status.code(),
        Some(2)
    );
    std::fs::write(&spec, "{\"bogus\": 1}").unwrap();
    assert_eq!(
        frdlab(&["grid", "--spec", spec.to_str().unwrap()]).status.code(),
        Some(2)
    );
    let missing = dir.path().join("missing.json");
    assert_eq!(
        frdlab(&["grid", "--spec", missing.to_str().unwrap()]).status.code(),
        Some(1)
    );
}

#[test]
fn oracle_reports_pass() {
    let out = frdlab(&["oracle", "--mode", "coverage", "--cases", "20"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("PASS coverage"));
    assert_eq!(frdlab(&["oracle", "--mode", "thresholds"]).status.code(), Some(0));
}
