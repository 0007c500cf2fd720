use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(format!("{name}.json"))
}

fn quickflex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quickflex"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn run_writes_the_two_bus_rectangle() {
    let dir = tempfile::tempdir().unwrap();
    let net = fixture("twobus");
    let out = quickflex(&[
        "run",
        "--network",
        net.to_str().unwrap(),
        "--method",
        "qf",
        "--formulation",
        "lindistflow",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let region = fs::read_to_string(dir.path().join("region.csv")).unwrap();
    assert_eq!(region.lines().next(), Some("p,q"));
    assert_eq!(region.lines().count(), 5);
    let metrics: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("metrics.json")).unwrap())
            .unwrap();
    assert!((metrics["area"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(metrics["method"], "qf");
    assert_eq!(metrics["formulation"], "lindistflow");
    for file in ["trace.csv", "region.svg"] {
        assert!(dir.path().join(file).is_file(), "{file}");
    }
}

#[test]
fn compare_reports_fractions() {
    let dir = tempfile::tempdir().unwrap();
    let net = fixture("twobus");
    let out = quickflex(&[
        "compare",
        "--network",
        net.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    let fraction = |method: &str| -> f64 {
        let row = table
            .lines()
            .find(|l| l.starts_with(&format!("{method},")))
            .unwrap();
        row.split(',').nth(4).unwrap().parse().unwrap()
    };
    assert!((fraction("qf") - 1.0).abs() < 1e-12);
    assert!(fraction("mc") < 1.0);
    for m in ["qf", "mc", "ec", "rr"] {
        assert!(dir.path().join(m).join("region.csv").is_file(), "{m}");
    }
    let svg = fs::read_to_string(dir.path().join("region.svg")).unwrap();
    assert!(svg.matches("<path").count() >= 2);
}

#[test]
fn negative_epsilon_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let net = fixture("twobus");
    let out = quickflex(&[
        "run",
        "--network",
        net.to_str().unwrap(),
        "--method",
        "qf",
        "--formulation",
        "soc",
        "--epsilon",
        "-1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(
        stderr(&out).contains("epsilon must be positive"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn bad_inputs_fail_with_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let missing = dir.path().join("missing.json");
    let out = quickflex(&[
        "run",
        "--network",
        missing.to_str().unwrap(),
        "--method",
        "qf",
        "--formulation",
        "soc",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("missing.json"), "{}", stderr(&out));

    let out = quickflex(&[
        "run",
        "--network",
        fixture("twobus").to_str().unwrap(),
        "--method",
        "simplex",
        "--formulation",
        "soc",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("simplex"), "{}", stderr(&out));

    let out = quickflex(&["run", "--bogus"]);
    assert!(!out.status.success());
}
