use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn polarity_lab(args: &[&str], config: Option<&str>, dir: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_polarity-lab"));
    cmd.args(args).arg("--output").arg(dir.join("out"));
    if let Some(text) = config {
        let path = dir.join("config.json");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn stderr_line(out: &Output) -> String {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(text.lines().count(), 1, "{text}");
    text.trim_end().to_string()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join("out").join(name)).unwrap()
}

#[test]
fn stability_default_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = polarity_lab(&["stability"], None, dir.path());
    assert!(out.status.success(), "{out:?}");
    let csv = read(dir.path(), "stability.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("l,G0,root_omega,verdict,case"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "1");
    assert!((first[2].parse::<f64>().unwrap() - 5.195886396207319).abs() < 1e-9);
    assert_eq!(&first[3..], ["unstable", "case2"]);

    let summary: serde_json::Value = serde_json::from_str(&read(dir.path(), "summary.json")).unwrap();
    assert_eq!(summary["command"], "stability");
    assert_eq!(summary["result"]["verdict"], "unstable");
    assert_eq!(summary["config"]["params"]["gamma"], 400.0);
    assert_eq!(summary["digests"]["stability.csv"].as_str().unwrap().len(), 64);
    assert!(summary["version"].as_str().unwrap().starts_with(env!("CARGO_PKG_VERSION")));
}

#[test]
fn reduced_stability_and_growth_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = polarity_lab(&["stability"], Some(r#"{"model":"reduced"}"#), dir.path());
    assert!(out.status.success(), "{out:?}");
    let csv = read(dir.path(), "stability.csv");
    assert!(csv.starts_with("l,mu,e,root_omega,verdict,case\n1,"));
    let out = polarity_lab(&["growth-curve"], None, dir.path());
    assert!(out.status.success());
    let csv = read(dir.path(), "growth_curve.csv");
    assert!(csv.starts_with("mu,omega_plus,s\n"));
    assert_eq!(csv.lines().count(), 401);
}

#[test]
fn validation_error_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = polarity_lab(&["stability"], Some(r#"{"params":{"d":-1}}"#), dir.path());
    assert_eq!(out.status.code(), Some(2));
    let line = stderr_line(&out);
    assert!(line.starts_with("error kind=validation_error exit=2:") && line.contains("params.d:"), "{line}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn parse_error_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let out = polarity_lab(&["equilibrium"], Some("{\n \"params\": {\"gamma\": \"x\"}\n}"), dir.path());
    assert_eq!(out.status.code(), Some(2));
    let line = stderr_line(&out);
    assert!(line.contains("params.gamma") && line.contains("line 2"), "{line}");
}

#[test]
fn missing_config_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_polarity-lab"))
        .args(["equilibrium", "--config"])
        .arg(dir.path().join("absent.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr_line(&out).starts_with("error kind=io_error exit=4:"));
}

#[test]
fn unwritable_output_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("out"), "a file, not a directory").unwrap();
    let out = polarity_lab(&["equilibrium"], None, dir.path());
    assert_eq!(out.status.code(), Some(4));
    stderr_line(&out);
}

#[test]
fn blowup_is_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"sim":{"t_end":0.05,"N_theta":32,"initial":{"kind":"mode","l":1,"amplitude":30}}}"#;
    let out = polarity_lab(&["simulate"], Some(cfg), dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_line(&out).starts_with("error kind=numerical_failure exit=3:"));
}

#[test]
fn usage_error_is_one_line() {
    let out = Command::new(env!("CARGO_BIN_EXE_polarity-lab")).arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_line(&out).starts_with("error kind=usage_error exit=2:"));
}

#[test]
fn bad_thread_cap_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_polarity-lab"))
        .arg("equilibrium")
        .arg("--output")
        .arg(dir.path())
        .env("POLARITY_LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_line(&out).contains("POLARITY_LAB_THREADS"));
}

#[test]
fn diffusion_scan_flips_between_one_and_ten() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"scan":{"param":"D","lower":1,"upper":1000,"count":4,"scale":"log"}}"#;
    let out = Command::new(env!("CARGO_BIN_EXE_polarity-lab"))
        .args(["scan", "--output"])
        .arg(dir.path().join("out"))
        .arg("--config")
        .arg({
            let p = dir.path().join("scan.json");
            fs::write(&p, cfg).unwrap();
            p
        })
        .env("POLARITY_LAB_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let csv = read(dir.path(), "scan.csv");
    let verdicts: Vec<String> = csv.lines().skip(1).map(|l| l.split(',').rev().nth(2).unwrap().to_string()).collect();
    assert_eq!(verdicts, ["stable", "unstable", "unstable", "unstable"]);
}

#[test]
fn gamma_scan_reduced_and_row_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"model":"reduced","scan":{"param":"gamma","lower":40,"upper":400,"count":2}}"#;
    assert!(polarity_lab(&["scan"], Some(cfg), dir.path()).status.success());
    let csv = read(dir.path(), "scan.csv");
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert!(rows[0].ends_with(",stable,none,") && rows[1].contains(",unstable,case2,"), "{csv}");

    let cfg = r#"{"model":"reduced","scan":{"param":"d","lower":-1,"upper":1,"count":3}}"#;
    assert!(polarity_lab(&["scan"], Some(cfg), dir.path()).status.success());
    let csv = read(dir.path(), "scan.csv");
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    let errors: Vec<String> = reader.records().map(|r| r.unwrap().get(16).unwrap().to_string()).collect();
    assert!(errors[0].contains("d:") && errors[2].is_empty(), "{errors:?}");
}

#[test]
fn empty_scan_range_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"scan":{"param":"D","lower":10,"upper":10,"count":4}}"#;
    let out = polarity_lab(&["scan"], Some(cfg), dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_line(&out).contains("empty range"));
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"sim":{"t_end":0.02,"N_theta":32,"snapshot_stride":100,"diagnostic_stride":20}}"#;
    let files = ["snapshots.csv", "diagnostics.csv", "summary.json"];
    let run = |seed: &str| {
        let out = polarity_lab(&["simulate", "--seed", seed], Some(cfg), dir.path());
        assert!(out.status.success(), "{out:?}");
        files.map(|f| read(dir.path(), f))
    };
    let first = run("17");
    let again = run("17");
    assert_eq!(first[0], again[0]);
    assert_eq!(first[1], again[1]);
    assert!(first[0].starts_with("t,theta,u,v\n"));
    assert!(first[1].starts_with("t,mass,u_min,u_max,v_min,v_max,a0,"));
    let summary: serde_json::Value = serde_json::from_str(&first[2]).unwrap();
    assert_eq!(summary["seed"], 17);
    assert!(summary["result"]["mass_drift"].as_f64().unwrap() < 1e-12);
    let other = run("18");
    assert_ne!(first[0], other[0]);
}

#[test]
fn full_simulation_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"model":"full","sim":{"t_end":0.01,"N_theta":16,"N_r":16}}"#;
    assert!(polarity_lab(&["simulate"], Some(cfg), dir.path()).status.success());
    assert!(read(dir.path(), "snapshots.csv").starts_with("t,theta,u,v,V_trace\n"));
}

#[test]
fn dispersion_and_nondim() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"dispersion":{"degrees":[1],"omega_min":0.1,"omega_max":10,"count":5}}"#;
    assert!(polarity_lab(&["dispersion"], Some(cfg), dir.path()).status.success());
    let csv = read(dir.path(), "dispersion.csv");
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.starts_with("l,omega,G\n1,1.0000000000000001e-1,"));

    let out = polarity_lab(&["nondim"], None, dir.path());
    assert_eq!(out.status.code(), Some(2));
    let cfg = r#"{"dimensional":{"k1_m2_per_mol_s":1,"k2_m2_per_mol_s":8000,"k3_mol_per_m2_s":1,
        "k4_mol_per_m2":0.5,"K5_m2_per_mol":0.05,"g0_mol_per_m2":0.02,"b6_m2_per_mol_s":0.36,
        "b_m6_per_s":5,"D_m2_per_s":100,"du_m2_per_s":1,"dv_m2_per_s":1,"c_max_mol_per_m2":1,
        "R_m":20,"vol_B_m3":1,"area_Gamma_m2":3}}"#;
    assert!(polarity_lab(&["nondim"], Some(cfg), dir.path()).status.success());
    let p: serde_json::Value = serde_json::from_str(&read(dir.path(), "nondim.json")).unwrap();
    assert_eq!(p["gamma"], 400.0);
    assert_eq!(p["a2"], 20.0);
}

#[test]
fn equilibrium_table() {
    let dir = tempfile::tempdir().unwrap();
    assert!(polarity_lab(&["equilibrium"], None, dir.path()).status.success());
    let csv = read(dir.path(), "equilibria.csv");
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert!((row[1].parse::<f64>().unwrap() - 0.19325626546073954).abs() < 1e-12);
    assert_eq!(row[7], "strict");
}
