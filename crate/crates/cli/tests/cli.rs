use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_plasmon-cqed");

fn scenario(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn run_scenario(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const FIT: &str = r#"{
  "material": { "model": "drude", "eps_inf": 6.0, "hbar_omega_p": 7.90, "hbar_gamma_p": 0.051 },
  "geometry": { "R": 8.0, "h": 2.0 },
  "emitter": { "hbar_omega0": 2.94, "d_eg": 25.0 },
  "run": { "task": "fit", "N": 6 }
}"#;

const DRESSED: &str = r#"{
  "material": { "model": "drude" },
  "geometry": { "R": 8.0, "h": 2.0 },
  "emitter": { "hbar_omega0": 2.94, "d_eg": 25.0 },
  "run": { "task": "dressed", "N": 25, "spectrum_grid": { "min": 2.5, "max": 3.3, "points": 801 } }
}"#;

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn fit_gives_six_modes_with_drude_linewidth() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenario(tmp.path(), "fit.json", FIT);
    let out = tmp.path().join("out");
    let o = run_scenario(&cfg, &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let modes: Value = serde_json::from_str(&fs::read_to_string(out.join("modes.json")).unwrap()).unwrap();
    let modes = modes["modes"].as_array().expect("modes array");
    assert_eq!(modes.len(), 6);
    for m in modes {
        let gamma = m["hbar_gamma"].as_f64().unwrap();
        assert!((gamma / 0.051 - 1.0).abs() < 0.1, "{gamma}");
        assert!(m["hbar_omega_n"].as_f64().unwrap() > 2.7);
        assert!(m["hbar_g"].as_f64().unwrap() > 0.0);
    }
    assert_eq!(data_rows(&fs::read_to_string(out.join("modes.csv")).unwrap()).len(), 6);
}

#[test]
fn dressed_has_one_row_per_state_and_the_rabi_splitting() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenario(tmp.path(), "dressed.json", DRESSED);
    let out = tmp.path().join("out");
    let o = run_scenario(&cfg, &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("dressed.csv")).unwrap();
    assert_eq!(data_rows(&csv).len(), 26);
    let pol = fs::read_to_string(out.join("polarization.csv")).unwrap();
    assert_eq!(data_rows(&pol).len(), 801);
    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("dressed.json")).unwrap()).unwrap();
    let split = summary["polarization_peak_separation_eV"].as_f64().unwrap();
    assert!((split / 0.144 - 1.0).abs() < 0.1, "{split}");
}

#[test]
fn negative_radius_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenario(tmp.path(), "bad.json", &FIT.replace("\"R\": 8.0", "\"R\": -8.0"));
    let out = tmp.path().join("out");
    let o = run_scenario(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("geometry.R"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn unknown_and_mistyped_keys_are_rejected_with_their_path() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        (
            FIT.replace("\"h\": 2.0", "\"h\": 2.0, \"height\": 3"),
            "geometry.height",
        ),
        (FIT.replace("\"N\": 6", "\"N\": \"six\""), "run.N"),
        (FIT.replace("\"fit\"", "\"plot\""), "run.task"),
    ];
    for (text, path) in cases {
        let cfg = scenario(tmp.path(), "bad.json", &text);
        let o = run_scenario(&cfg, &tmp.path().join("out"), &[]);
        assert_eq!(o.status.code(), Some(2));
        assert!(stderr(&o).contains(path), "{path}: {}", stderr(&o));
    }
}

#[test]
fn missing_config_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_scenario(&tmp.path().join("none.json"), &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenario(tmp.path(), "dressed.json", DRESSED);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run_scenario(&cfg, &a, &[]).status.success());
    assert!(run_scenario(&cfg, &b, &["--threads", "2"]).status.success());
    for f in ["dressed.csv", "polarization.csv", "radiated.csv", "dressed.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn manifest_lists_every_output_and_validates() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenario(tmp.path(), "fit.json", FIT);
    let out = tmp.path().join("out");
    let o = run_scenario(&cfg, &out, &["--verify"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest: Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let mut listed: Vec<String> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["file"].as_str().unwrap().to_string())
        .collect();
    listed.push("manifest.json".into());
    listed.sort();
    let mut present: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    present.sort();
    assert_eq!(listed, present);
    assert_eq!(manifest["task"], "fit");
    assert_eq!(manifest["verification"]["pass"], true);
    assert_eq!(manifest["resolved"]["geometry"]["radius"], 8.0);

    let dir = out.to_str().unwrap();
    assert!(run(&["validate", dir]).status.success());
    fs::write(out.join("modes.csv"), "tampered\n").unwrap();
    let o = run(&["validate", dir]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("modes.csv"));
}

#[test]
fn numerical_failure_names_the_operation_and_leaves_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    // permittivity table that stops short of the fitting grid
    let table: String = (0..241)
        .map(|i| {
            let e = 1.0 + 0.01 * i as f64;
            let re = 6.0 - 7.9f64.powi(2) / (e * e + 0.051f64.powi(2));
            let im = 7.9f64.powi(2) * 0.051 / (e * (e * e + 0.051f64.powi(2)));
            format!("{e} {re} {im}\n")
        })
        .collect();
    fs::write(tmp.path().join("table.txt"), table).unwrap();
    let text = FIT.replace(
        r#"{ "model": "drude", "eps_inf": 6.0, "hbar_omega_p": 7.90, "hbar_gamma_p": 0.051 }"#,
        r#"{ "model": "tabulated", "path": "table.txt" }"#,
    );
    let cfg = scenario(tmp.path(), "tab.json", &text);
    let out = tmp.path().join("out");
    let o = run_scenario(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("coupling::extract_modes"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn partial_outputs_are_removed_when_a_write_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenario(tmp.path(), "fit.json", FIT);
    let out = tmp.path().join("out");
    // a directory where modes.json should go makes the second write fail
    fs::create_dir_all(out.join("modes.json")).unwrap();
    let o = run_scenario(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(!out.join("modes.csv").exists());
    assert!(!out.join("manifest.json").exists());
    assert!(out.join("modes.json").is_dir());
}

#[test]
fn output_dir_from_config_is_relative_to_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let text = FIT.replace("\"N\": 6", "\"N\": 2, \"output_dir\": \"results\"");
    let cfg = scenario(tmp.path(), "fit.json", &text);
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(tmp.path().join("results").join("modes.csv").exists());
}

#[test]
fn figure_suite_reproduces_the_reference_numbers() {
    let tmp = tempfile::tempdir().unwrap();
    let text = FIT.replace("\"fit\"", "\"figure-suite\"");
    let cfg = scenario(tmp.path(), "figs.json", &text);
    let out = tmp.path().join("out");
    let o = run_scenario(&cfg, &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in [
        "fig2.csv",
        "fig3.csv",
        "fig4a.csv",
        "fig4b.csv",
        "fig5.csv",
        "fig6a.csv",
        "fig6b.csv",
        "fig8.csv",
        "fig9.csv",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let failed: Vec<&Value> = summary["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] != true)
        .collect();
    assert!(failed.is_empty(), "{failed:?}");
    let q = summary["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "q_F_h30")
        .unwrap();
    assert!((q["value"].as_f64().unwrap() + 4.2).abs() < 0.63);

    let fig6b = fs::read_to_string(out.join("fig6b.csv")).unwrap();
    let header = fig6b.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "h_nm,gamma_ratio_adiabatic,gamma_ratio_fermi");
    let at5: Vec<f64> = data_rows(&fig6b)
        .iter()
        .find(|l| l.starts_with("5,"))
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!((at5[1] / 30.0 - 1.0).abs() < 0.15 && (at5[2] / 30.0 - 1.0).abs() < 0.15);

    let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("R = 8 nm assumed"));
}
