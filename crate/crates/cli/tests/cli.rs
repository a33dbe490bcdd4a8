use std::path::{Path, PathBuf};
use std::process::Command;

use diskchain::bohr::{parse_rational, K2Report};
use diskchain::cdomain::{boundary_samples, check_domain};
use diskchain::realize::random_colligation;
use diskchain::{CMatrix, Colligation, DomainSpec, C64};
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_diskchain")).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const ANNULUS: &str = r#"{"components":[{"kind":"disk","center":[0,0],"radius":1},{"kind":"hole","center":[0,0],"radius":0.5}]}"#;
const THREE: &str = r#"{"components":[{"kind":"disk","center":[0,0],"radius":1},{"kind":"hole","center":[0.5,0],"radius":0.25},{"kind":"halfplane","theta":0,"offset":1}]}"#;

#[test]
fn certify_reference_exits_zero() {
    let r = run(&["bohr", "certify-k2", "--reference-d", "--rho", "3177/10000", "--deg", "12"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("certified"));
    let r = run(&["bohr", "certify-k2", "--reference-d", "--rho", "0.3177"]);
    assert_eq!(r.code, 0);
}

#[test]
fn certificate_json_roundtrips_and_rechecks() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("cert.json");
    let r = run(&["--json", "bohr", "certify-k2", "--reference-d", "--out", s(&out)]);
    assert_eq!(r.code, 0);
    let from_stdout: K2Report = serde_json::from_str(&r.stdout).unwrap();
    let from_file: K2Report = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(from_stdout, from_file);
    assert_eq!(from_file.rho, "3177/10000");
    let again = from_file.recheck().unwrap();
    assert!(again.certified);
    assert_eq!(again.report(), from_file);
}

#[test]
fn uncertified_exits_one() {
    let r = run(&["bohr", "certify-k2", "--d", "0,0,0,0", "--rho", "1/3", "--deg", "6"]);
    assert_eq!(r.code, 1);
    let r = run(&["bohr", "certify-k2", "--reference-d", "--deg", "0"]);
    assert_eq!(r.code, 1);
}

#[test]
fn improve_with_zero_budget_certifies_seed() {
    let r = run(&["--json", "bohr", "improve-k2", "--reference-d", "--budget", "0"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    let rho = parse_rational(v["certificate"]["rho"].as_str().unwrap()).unwrap();
    assert!(rho <= parse_rational("3177/10000").unwrap());
    assert_eq!(v["evaluations"], 0);
}

#[test]
fn demo_kl_reports_three() {
    let r = run(&["demo", "kl", "--k", "1", "--l", "1", "--r", "0.5"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("‖F(M)‖ = 3.000000000000"), "{}", r.stdout);
    let r = run(&["--json", "demo", "kl", "--k", "2", "--l", "3", "--r", "0.3"]);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    let want = 1.0 + 0.3f64.powi(-3);
    assert!((v["norm_f_m"].as_f64().unwrap() - want).abs() < 1e-9 * want);
}

#[test]
fn hole_only_spec_fails_validation() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"components":[{"kind":"hole","center":[0,0],"radius":0.5}]}"#);
    assert_eq!(run(&["domain", "validate", s(&bad)]).code, 1);
    let good = write(dir.path(), "ann.json", ANNULUS);
    assert_eq!(run(&["domain", "validate", s(&good)]).code, 0);
    // nonempty check: disk inside a hole
    let empty = write(
        dir.path(),
        "empty.json",
        r#"{"components":[{"kind":"disk","center":[0,0],"radius":0.2},{"kind":"hole","center":[0,0],"radius":0.5}]}"#,
    );
    assert_eq!(run(&["domain", "validate", s(&empty)]).code, 1);
}

#[test]
fn usage_and_parse_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let garbage = write(dir.path(), "g.json", "{not json");
    assert_eq!(run(&["domain", "validate", s(&garbage)]).code, 2);
    assert_eq!(run(&["domain", "validate", "/nonexistent/spec.json"]).code, 2);
    assert_eq!(run(&["nonsense"]).code, 2);
    assert_eq!(run(&["bohr", "certify-k2"]).code, 2);
    assert_eq!(run(&["bohr", "certify-k2", "--d", "1,2,3"]).code, 2);
    assert_eq!(run(&["bohr", "certify-k2", "--reference-d", "--rho", "x/y"]).code, 2);
    assert_eq!(run(&["demo", "kl", "--k", "1", "--l", "1", "--r", "1.5"]).code, 2);
    assert_eq!(run(&["--help"]).code, 0);
}

#[test]
fn numeric_and_output_failures_exit_three() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "f.json", r#"{"kmin":-1,"coeffs":[[1,0]]}"#);
    let t = write(dir.path(), "t.json", "[[[0,0],[0,0]],[[0,0],[1,0]]]");
    let r = run(&["bohr", "chain", s(&f), "--matrix", s(&t), "--rho", "0.3", "--outer", "1", "--inner", "0.5"]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    let spec = write(dir.path(), "ann.json", ANNULUS);
    let r = run(&["domain", "plot", s(&spec), "--out", "/nonexistent/dir/out.svg"]);
    assert_eq!(r.code, 3);
}

#[test]
fn exit_codes_are_total() {
    let dir = TempDir::new().unwrap();
    let spec = write(dir.path(), "ann.json", ANNULUS);
    let cases: Vec<Vec<&str>> = vec![
        vec![],
        vec!["domain"],
        vec!["domain", "check", s(&spec)],
        vec!["agler", "class"],
        vec!["realize", "eval", s(&spec), "--domain", s(&spec)],
        vec!["bohr", "chain", s(&spec), "--matrix", s(&spec), "--rho", "1", "--outer", "1", "--inner", "2"],
        vec!["demo", "kl", "--k", "0", "--l", "1", "--r", "0.5"],
    ];
    for c in cases {
        let code = run(&c).code;
        assert!((0..=3).contains(&code), "{c:?} -> {code}");
    }
}

#[test]
fn csv_rows_match_kept_samples() {
    let dir = TempDir::new().unwrap();
    let spec_path = write(dir.path(), "k3.json", THREE);
    let out = dir.path().join("k3.csv");
    assert_eq!(run(&["domain", "plot", s(&spec_path), "--out", s(&out), "--samples", "128"]).code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("component_index,x,y"));
    let spec: DomainSpec = serde_json::from_str(THREE).unwrap();
    let kept = boundary_samples(&spec, 128).unwrap();
    let rows: Vec<(usize, f64, f64)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), kept.len());
    for ((j, x, y), (kj, z)) in rows.iter().zip(&kept) {
        assert_eq!(j, kj);
        assert_eq!((*x, *y), (z.re, z.im));
    }
}

#[test]
fn svg_has_one_style_per_component_kind() {
    let dir = TempDir::new().unwrap();
    let spec_path = write(dir.path(), "ann.json", ANNULUS);
    let out = dir.path().join("ann.svg");
    assert_eq!(run(&["domain", "plot", s(&spec_path), "--out", s(&out)]).code, 0);
    let svg = std::fs::read_to_string(&out).unwrap();
    assert!(svg.starts_with("<svg"));
    // two full circles
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert_eq!(svg.matches("stroke-dasharray").count(), 1);
    let k3 = write(dir.path(), "k3.json", THREE);
    let out3 = dir.path().join("k3.svg");
    assert_eq!(run(&["domain", "plot", s(&k3), "--out", s(&out3), "--overlay"]).code, 0);
    let svg3 = std::fs::read_to_string(&out3).unwrap();
    assert!(svg3.contains("#888888"));
    assert!(svg3.contains("component-2"));
}

#[test]
fn check_output_reparses() {
    let dir = TempDir::new().unwrap();
    let spec_path = write(dir.path(), "k3.json", THREE);
    let out = dir.path().join("check.json");
    assert_eq!(run(&["domain", "check", s(&spec_path), "--out", s(&out)]).code, 0);
    let back: DomainSpec = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let spec: DomainSpec = serde_json::from_str(THREE).unwrap();
    assert_eq!(back, check_domain(&spec).unwrap());
}

#[test]
fn lift_and_bounds_for_z_plus_inverse() {
    let dir = TempDir::new().unwrap();
    let spec = write(dir.path(), "ann.json", ANNULUS);
    let f = write(dir.path(), "f.json", r#"{"num":[[1,0],[1,0],[1,0]],"den":[[0,0],[1,0]]}"#);
    let out = dir.path().join("lift.json");
    let r = run(&["--json", "lift", s(&f), "--domain", s(&spec), "--out", s(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert!(v["max_consistency_error"].as_f64().unwrap() < 1e-9);
    let r = run(&["--json", "agler", "upper", s(&f), "--domain", s(&spec), "--grid", "64"]);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert!((v["bound"].as_f64().unwrap() - 4.0).abs() < 1e-9);
    let r = run(&["--json", "agler", "lower", s(&f), "--domain", s(&spec), "--samples", "4"]);
    let lo: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert!(lo["bound"].as_f64().unwrap() <= 4.0 + 1e-8);
}

#[test]
fn class_and_perturb() {
    let dir = TempDir::new().unwrap();
    let spec = write(dir.path(), "ann.json", ANNULUS);
    let member = CMatrix::from_diag(&[C64::new(0.8, 0.0), C64::new(-0.6, 0.1)]);
    let outside = CMatrix::from_diag(&[C64::new(0.3, 0.0), C64::new(0.9, 0.0)]);
    let m = write(dir.path(), "m.json", &serde_json::to_string(&member).unwrap());
    let o = write(dir.path(), "o.json", &serde_json::to_string(&outside).unwrap());
    assert_eq!(run(&["agler", "class", s(&m), "--domain", s(&spec)]).code, 0);
    assert_eq!(run(&["agler", "class", s(&o), "--domain", s(&spec)]).code, 1);
    let out = dir.path().join("te.json");
    let r = run(&[
        "agler", "perturb", s(&m), "--domain", s(&spec), "--eps", "1e-2", "--mode", "decentered", "--out", s(&out),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let te: CMatrix = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(te.shape(), (2, 2));
    // convex mode needs --p and a hole-free domain
    assert_eq!(run(&["agler", "perturb", s(&m), "--domain", s(&spec), "--eps", "0.1", "--mode", "convex"]).code, 2);
}

#[test]
fn realize_roundtrip_and_verify() {
    let dir = TempDir::new().unwrap();
    let spec = write(dir.path(), "ann.json", ANNULUS);
    let c = random_colligation(2, 2, 1, 1, 0.9, 7).unwrap();
    let text = serde_json::to_string(&c).unwrap();
    let back: Colligation = serde_json::from_str(&text).unwrap();
    assert_eq!(back, c);
    let cp = write(dir.path(), "c.json", &text);
    let r = run(&["realize", "verify", s(&cp), "--domain", s(&spec), "--samples", "5"]);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
    let r = run(&["--json", "realize", "eval", s(&cp), "--domain", s(&spec), "--z", "0.7,0.1"]);
    assert_eq!(r.code, 0);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    let value: CMatrix = serde_json::from_value(v["value"].clone()).unwrap();
    assert_eq!(value.shape(), (1, 1));
    assert!(v["norm"].as_f64().unwrap() <= 0.9 + 1e-9);
    let r = run(&["realize", "demo-sigma", s(&cp), "--outer", "1", "--inner", "0.5", "--lo", "-4", "--hi", "4"]);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
}

#[test]
fn chain_passes_on_simple_pair() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "f.json", r#"{"kmin":-1,"coeffs":[[1,0],[0.5,0],[0.25,0]]}"#);
    let t = write(dir.path(), "t.json", "[[[0.6,0],[0.1,0]],[[0,0],[0.8,0]]]");
    let r = run(&["bohr", "chain", s(&f), "--matrix", s(&t), "--rho", "0.3", "--outer", "1", "--inner", "0.5"]);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
}
