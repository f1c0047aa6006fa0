use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use centro_affine::io::{read_csv, read_scan_csv, CurveFile};

fn centro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_centro"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name);
    let p = path.to_str().unwrap().to_string();
    let mut full = vec!["gen", "--output", &p];
    full.extend_from_slice(args);
    let out = centro(&full);
    assert!(out.status.success(), "{}", stderr(&out));
    p
}

#[test]
fn selfcheck_passes() {
    let out = centro(&["selfcheck", "--n", "128", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("kdv.conservation"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn circle_scan_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let c = gen(dir.path(), "circle.json", &["--preset", "circle"]);
    let out = centro(&[
        "scan",
        "--input",
        &c,
        "--lambda-min",
        "0",
        "--lambda-max",
        "1",
        "--lambda-steps",
        "11",
    ]);
    assert!(out.status.success());
    let scan = read_scan_csv(&stdout(&out)).unwrap();
    assert_eq!(scan.tr2.len(), 11);
    for (l, v) in scan.lambdas.iter().zip(&scan.tr2) {
        let exact = 4.0 * (PI * (1.0 - l).sqrt()).cos().powi(2);
        assert!((v - exact).abs() <= 1e-8, "lambda {l}: {v} vs {exact}");
    }
}

#[test]
fn elliptic_parameter_exits_with_numerical_code() {
    let dir = tempfile::tempdir().unwrap();
    let c = gen(dir.path(), "circle.json", &["--preset", "circle"]);
    let out = centro(&["backlund", "--input", &c, "--c", "2", "--c-kind", "affine"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).starts_with("ERROR NoRealFixedPoints:"));
}

#[test]
fn precondition_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let c = gen(dir.path(), "circle.json", &["--preset", "circle"]);
    let out = centro(&[
        "backlund",
        "--input",
        &c,
        "--c",
        "-1",
        "--c-kind",
        "projective",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("ERROR NegativeProjective:"));
    let out = centro(&["gen", "--n", "15"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("ERROR InvalidGrid:"));
}

#[test]
fn backlund_on_circle_rotates_it() {
    let dir = tempfile::tempdir().unwrap();
    let c = gen(
        dir.path(),
        "circle.json",
        &["--preset", "circle", "--n", "64"],
    );
    let d = dir.path().join("delta.json");
    let out = centro(&[
        "backlund",
        "--input",
        &c,
        "--c",
        "0.5",
        "--output",
        d.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let (before, after) = (&report["before"], &report["after"]);
    for key in ["H1", "H2", "I", "J", "K"] {
        let (x, y) = (before[key].as_f64().unwrap(), after[key].as_f64().unwrap());
        assert!((x - y).abs() < 1e-9, "{key}");
    }
    let file = CurveFile::from_json(&fs::read_to_string(d).unwrap()).unwrap();
    let CurveFile::CentroAffine { gamma1, .. } = file else {
        panic!("expected a centro-affine curve");
    };
    assert!((gamma1[0] - (PI / 6.0).cos()).abs() < 1e-9);
}

#[test]
fn artifacts_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = gen(dir.path(), "g.json", &["--seed", "4", "--n", "64"]);
    let lifted = dir.path().join("lift.json");
    let back = dir.path().join("back.json");
    assert!(
        centro(&["lift", "--input", &g, "--output", lifted.to_str().unwrap()])
            .status
            .success()
    );
    assert!(centro(&[
        "project",
        "--input",
        lifted.to_str().unwrap(),
        "--output",
        back.to_str().unwrap()
    ])
    .status
    .success());
    let scan = |input: &str| {
        read_scan_csv(&stdout(&centro(&[
            "scan",
            "--input",
            input,
            "--lambda-steps",
            "5",
        ])))
        .unwrap()
    };
    let (a, b) = (scan(&g), scan(back.to_str().unwrap()));
    assert!(a.max_deviation(&b) <= 1e-12);
    let seed = CurveFile::from_json(&fs::read_to_string(&back).unwrap())
        .unwrap()
        .seed();
    assert_eq!(seed, Some(4));
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "a.json", &["--seed", "11"]);
    let b = gen(dir.path(), "b.json", &["--seed", "11"]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let run = || {
        stdout(&centro(&[
            "kdv", "--input", &a, "--s-end", "0.002", "--every", "5",
        ]))
    };
    assert_eq!(run(), run());
}

#[test]
fn kdv_trace_has_header_and_conserves() {
    let dir = tempfile::tempdir().unwrap();
    let g = gen(dir.path(), "g.json", &["--seed", "2", "--n", "64"]);
    let out = centro(&["kdv", "--input", &g, "--s-end", "0.004", "--every", "10"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("# seed=2\n"));
    let rows = read_csv(&text, "s,H1,H2,I,J,K").unwrap();
    assert_eq!(rows.len(), 5);
    for r in &rows {
        for col in 1..6 {
            assert!((r[col] - rows[0][col]).abs() < 1e-7);
        }
    }
}

#[test]
fn permutability_report_closes() {
    let dir = tempfile::tempdir().unwrap();
    let g = gen(dir.path(), "g.json", &["--seed", "5", "--n", "64"]);
    let out = centro(&["permutability", "--input", &g, "--c1", "4", "--c2", "3"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report["closure"].as_f64().unwrap() < 1e-6);
    assert!((report["mu"].as_f64().unwrap() + 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn scan_with_delta_reports_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let g = gen(dir.path(), "g.json", &["--seed", "6", "--n", "64"]);
    let d = dir.path().join("delta.csv");
    let out = centro(&[
        "scan",
        "--input",
        &g,
        "--c",
        "0.5",
        "--lambda-steps",
        "4",
        "--delta-output",
        d.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let dev: f64 = stderr(&out)
        .trim()
        .strip_prefix("max_deviation ")
        .unwrap()
        .parse()
        .unwrap();
    assert!(dev < 1e-6);
    let a = read_scan_csv(&stdout(&out)).unwrap();
    let b = read_scan_csv(&fs::read_to_string(d).unwrap()).unwrap();
    assert_eq!(a.lambdas, b.lambdas);
}
