use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ruin-alloc"))
}

fn model(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows (after metadata and header) split into cells.
fn rows(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

fn cell(csv: &str, column: &str) -> f64 {
    let (h, r) = rows(csv);
    let i = h.iter().position(|c| c == column).unwrap();
    r[0][i].parse().unwrap()
}

fn error_json(o: &Output) -> serde_json::Value {
    let err = String::from_utf8(o.stderr.clone()).unwrap();
    serde_json::from_str(err.lines().last().unwrap()).unwrap()
}

#[test]
fn asymptotic_allocation_on_brownian_model() {
    let o = run(&[
        "allocate",
        "--model",
        model("brownian.json").to_str().unwrap(),
        "--method",
        "asymptotic",
    ]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!((cell(&s, "c_1") - 1.0 / 3.0).abs() < 1e-12);
    assert!((cell(&s, "c_2") - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn infinite_horizon_var_of_compound_poisson_model() {
    let m = model("compound_poisson.json");
    let o = run(&[
        "var",
        "--model",
        m.to_str().unwrap(),
        "--alpha",
        "0.01",
        "--horizon",
        "inf",
    ]);
    assert!(o.status.success());
    let expected = -10.0 * (0.01f64 * 2.0 / 1.8).ln();
    assert!((cell(&stdout(&o), "var") - expected).abs() < 1e-8);
}

#[test]
fn infinite_horizon_ruin_of_brownian_model() {
    let m = model("brownian.json");
    let o = run(&[
        "ruin",
        "--model",
        m.to_str().unwrap(),
        "--u",
        "2",
        "--horizon",
        "inf",
    ]);
    assert!(o.status.success());
    assert!((cell(&stdout(&o), "psi") - (-4.0f64).exp()).abs() < 1e-15);
}

#[test]
fn metadata_precedes_header() {
    let m = model("brownian.json");
    let s = stdout(&run(&[
        "ruin",
        "--model",
        m.to_str().unwrap(),
        "--u",
        "1",
        "--horizon",
        "2",
    ]));
    let lines: Vec<&str> = s.lines().collect();
    assert!(lines[0].starts_with("# generator: ruin-alloc"));
    let hash = lines
        .iter()
        .find(|l| l.starts_with("# model_sha256: "))
        .unwrap();
    assert_eq!(hash.trim_start_matches("# model_sha256: ").len(), 64);
    assert!(lines.contains(&"# seed: 20240917"));
    assert_eq!(lines.iter().filter(|l| !l.starts_with('#')).count(), 2);
}

#[test]
fn allocate_by_alpha_uses_var() {
    let m = model("compound_poisson.json");
    let o = run(&[
        "allocate",
        "--model",
        m.to_str().unwrap(),
        "--method",
        "gvar",
        "--alpha",
        "0.05",
    ]);
    assert!(o.status.success(), "{:?}", o);
    let s = stdout(&o);
    let u = cell(&s, "u");
    assert!((u - 10.0 * (0.9f64 / 0.05).ln()).abs() < 1e-8);
    assert!((cell(&s, "K_1") + cell(&s, "K_2") - u).abs() < 1e-6);
}

#[test]
fn empty_file_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("empty.json");
    std::fs::write(&p, "").unwrap();
    let o = run(&["var", "--model", p.to_str().unwrap(), "--alpha", "0.1"]);
    assert_eq!(o.status.code(), Some(1));
    let e = error_json(&o);
    assert_eq!(e["kind"], "parse");
    assert!(e["line"].is_u64() && e["column"].is_u64());
}

#[test]
fn non_symmetric_covariance_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(
        &p,
        r#"{"type":"brownian","drift":[-1,-1],"cov":[[1,0.2],[0.3,1]]}"#,
    )
    .unwrap();
    let o = run(&["ruin", "--model", p.to_str().unwrap(), "--u", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let e = error_json(&o);
    assert_eq!(e["kind"], "invalid_model");
    assert!(e["violations"]
        .as_array()
        .unwrap()
        .iter()
        .any(|v| v.as_str().unwrap().contains("symmetric")));
}

#[test]
fn unknown_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("extra.json");
    std::fs::write(
        &p,
        r#"{"type":"cp_exp","premium":[1],"intensity":[0.5],"claim_rate":1,"seed":3}"#,
    )
    .unwrap();
    let o = run(&["ruin", "--model", p.to_str().unwrap(), "--u", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_json(&o)["kind"], "parse");
}

#[test]
fn numerical_failures_exit_with_two() {
    let m = model("brownian_positive_drift.json");
    let o = run(&[
        "allocate",
        "--model",
        m.to_str().unwrap(),
        "--method",
        "kbar",
        "--u",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["kind"], "undefined_allocation");

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("up.json");
    std::fs::write(
        &p,
        r#"{"type":"cp_exp","premium":[1,1],"intensity":[1.5,1.5],"claim_rate":1}"#,
    )
    .unwrap();
    let o = run(&[
        "allocate",
        "--model",
        p.to_str().unwrap(),
        "--method",
        "asymptotic",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["kind"], "no_cramer_root");
}

#[test]
fn usage_errors_exit_with_one() {
    let m = model("brownian.json");
    let o = run(&["allocate", "--model", m.to_str().unwrap(), "--method", "k"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&[
        "allocate",
        "--model",
        m.to_str().unwrap(),
        "--method",
        "k",
        "--u",
        "1",
        "--alpha",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&[
        "ruin",
        "--model",
        m.to_str().unwrap(),
        "--u",
        "1",
        "--horizon",
        "soon",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_json(&o)["kind"], "usage");
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let m = model("brownian.json");
    let o = run(&[
        "ruin",
        "--model",
        m.to_str().unwrap(),
        "--u",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(out)
        .unwrap()
        .contains("u,horizon,psi"));
}

#[test]
fn sweep_over_alpha() {
    let m = model("compound_poisson.json");
    let o = run(&[
        "sweep",
        "--model",
        m.to_str().unwrap(),
        "--method",
        "kbar",
        "--over",
        "alpha",
        "--from",
        "0.001",
        "--to",
        "0.1",
        "--points",
        "5",
        "--log",
    ]);
    assert!(o.status.success(), "{:?}", o);
    let (h, r) = rows(&stdout(&o));
    assert_eq!(h[0], "alpha");
    assert_eq!(r.len(), 5);
    let c1: Vec<f64> = r
        .iter()
        .map(|row| {
            row[h.iter().position(|c| c == "c_1").unwrap()]
                .parse()
                .unwrap()
        })
        .collect();
    // larger capital moves the fraction towards m_1/m
    assert!(c1.windows(2).all(|w| w[0] > w[1]));
}

#[test]
fn sweep_over_horizon() {
    let m = model("brownian.json");
    let o = run(&[
        "sweep",
        "--model",
        m.to_str().unwrap(),
        "--method",
        "k",
        "--over",
        "T",
        "--from",
        "0.1",
        "--to",
        "10",
        "--points",
        "3",
        "--log",
        "--u",
        "1",
    ]);
    assert!(o.status.success(), "{:?}", o);
    let (h, r) = rows(&stdout(&o));
    assert_eq!(r.len(), 3);
    assert_eq!(r[2][h.iter().position(|c| c == "horizon").unwrap()], "10");
}

#[test]
fn figures_are_complete_and_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = run(&["figures", "--out", d.path().to_str().unwrap()]);
        assert!(o.status.success(), "{:?}", o);
    }
    for name in [
        "fig1.csv",
        "fig2a.csv",
        "fig2b.csv",
        "fig3a.csv",
        "fig3b.csv",
        "fig4a.csv",
        "fig4b.csv",
    ] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
        let (_, r) = rows(&String::from_utf8(x).unwrap());
        let expected = match name {
            "fig1.csv" | "fig2b.csv" => 60,
            "fig2a.csv" | "fig3b.csv" => 60,
            _ => 40,
        };
        assert_eq!(r.len(), expected, "{name}");
    }
}

#[test]
fn figure_grids_can_be_overridden() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&[
        "figures",
        "--out",
        d.path().to_str().unwrap(),
        "--alpha-range",
        "-2:-1:3",
        "--t-range",
        "0:1:2",
    ]);
    assert!(o.status.success(), "{:?}", o);
    let (_, r) = rows(&std::fs::read_to_string(d.path().join("fig3a.csv")).unwrap());
    assert_eq!(r.len(), 3);
    let (_, r) = rows(&std::fs::read_to_string(d.path().join("fig1.csv")).unwrap());
    assert_eq!(r.len(), 2);
}

#[test]
fn simulated_output_ignores_worker_count() {
    let m = model("compound_poisson.json");
    let args = [
        "ruin",
        "--model",
        m.to_str().unwrap(),
        "--u",
        "3",
        "--horizon",
        "20",
        "--paths",
        "4000",
    ];
    let one = run(&[&args[..], &["--workers", "1"]].concat());
    let many = run(&[&args[..], &["--workers", "3"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, many.stdout);
    assert!(stdout(&one).contains("monte_carlo"));
}

#[test]
fn verify_reports_every_check() {
    let m = model("compound_poisson.json");
    let o = run(&["verify", "--model", m.to_str().unwrap(), "--paths", "20000"]);
    let s = stdout(&o);
    let (h, r) = rows(&s);
    assert_eq!(h, ["check", "status", "value", "reference", "tolerance"]);
    assert!(r.len() >= 10);
    let failed = r.iter().filter(|row| row[1] == "FAIL").count();
    assert_eq!(o.status.code(), Some(if failed == 0 { 0 } else { 2 }));
    assert!(r
        .iter()
        .filter(|row| row[0].contains("phase-type"))
        .all(|row| row[1] == "PASS"));
}
