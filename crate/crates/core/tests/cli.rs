use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path
}

fn atomic_config(n: usize, l_values: &str) -> String {
    format!(
        r#"{{"model":{{"kind":"atomic_limit","N":{n},"u":0.0,"W":0.0,"seed":0,"boundary":"open","g":1.0}},
            "L_values":{l_values}}}"#
    )
}

fn run(cmd: &str, config: &Path, out: &Path) -> Output {
    lab(&[cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_column(path: &Path, column: &str) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let k = r.headers().unwrap().iter().position(|h| h == column).unwrap();
    r.records().map(|rec| rec.unwrap()[k].to_string()).collect()
}

fn assert_manifest_complete(out: &Path) {
    let manifest = read_json(&out.join("manifest.json"));
    let outputs = manifest["outputs"].as_array().unwrap();
    assert!(!outputs.is_empty());
    for entry in outputs {
        let path = out.join(entry["path"].as_str().unwrap());
        let len = fs::metadata(&path).unwrap().len();
        assert!(len > 0);
        assert_eq!(len, entry["bytes"].as_u64().unwrap());
    }
    assert_eq!(manifest["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn spectrum_atomic_has_two_levels() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &atomic_config(4, "[1,2]"));
    let out = tmp.path().join("out");
    let res = run("spectrum", &cfg, &out);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let mut levels: Vec<f64> = csv_column(&out.join("eigenvalues.csv"), "eigenvalue")
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    levels.dedup();
    assert_eq!(levels, vec![-0.5, 0.5]);
    let summary = read_json(&out.join("spectrum.json"));
    assert_eq!(summary["rank"], 64);
    assert_manifest_complete(&out);
}

#[test]
fn spectrum_two_band_records_decay_rate() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"model":{"kind":"two_band_chern","N":8,"u":3.0,"W":0.0,"seed":0,"boundary":"open","g":1.0},
            "L_values":[2]}"#,
    );
    let out = tmp.path().join("out");
    assert_eq!(run("spectrum", &cfg, &out).status.code(), Some(0));
    let fit = read_json(&out.join("decay_fit.json"));
    assert!(fit["gamma"].as_f64().unwrap() > 0.0);
}

#[test]
fn oversized_window_is_rejected_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &atomic_config(4, "[3]"));
    let out = tmp.path().join("out");
    let res = run("spectrum", &cfg, &out);
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unknown_toggle_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let json = r#"{"model":{"kind":"atomic_limit","N":4,"u":0.0,"W":0.0,"seed":0,"boundary":"open","g":1.0},
        "L_values":[1],"toggles":{"near_bd":true,"far_boundary":false}}"#;
    let cfg = write_config(tmp.path(), "c.json", json);
    let out = tmp.path().join("out");
    let res = run("estimates", &cfg, &out);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("far_boundary"));
    assert!(!out.exists());
}

#[test]
fn missing_output_directory_is_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &atomic_config(4, "[1]"));
    let res = lab(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    let res = lab(&["spectrum", "--config", tmp.path().join("absent.json").to_str().unwrap(), "--out", "x"]);
    assert_eq!(res.status.code(), Some(2));
    assert_eq!(lab(&["spectra"]).status.code(), Some(2));
}

#[test]
fn marker_sweep_atomic_vanishes_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &atomic_config(4, "[1,2]"));
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run("marker-sweep", &cfg, &a).status.code(), Some(0));
    assert_eq!(run("marker-sweep", &cfg, &b).status.code(), Some(0));
    let values = csv_column(&a.join("markers.csv"), "value");
    assert_eq!(values.len(), 4);
    assert!(values.iter().all(|v| v.parse::<f64>().unwrap().abs() <= 1e-8));
    assert_eq!(fs::read(a.join("markers.csv")).unwrap(), fs::read(b.join("markers.csv")).unwrap());
    assert!(read_json(&a.join("oracle.json"))["chern_number"].is_null());
    assert_manifest_complete(&a);
}

#[test]
fn marker_sweep_two_band_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"model":{"kind":"two_band_chern","N":6,"u":1.0,"W":0.3,"seed":5,"boundary":"open","g":1.0},
            "L_values":[2,3]}"#,
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run("marker-sweep", &cfg, &a).status.code(), Some(0));
    assert_eq!(run("marker-sweep", &cfg, &b).status.code(), Some(0));
    assert_eq!(fs::read(a.join("markers.csv")).unwrap(), fs::read(b.join("markers.csv")).unwrap());
    assert_manifest_complete(&a);
}

#[test]
fn dichotomy_atomic_is_trivial() {
    let tmp = tempfile::tempdir().unwrap();
    let json = r#"{"model":{"kind":"atomic_limit","N":4,"u":0.0,"W":0.2,"seed":3,"boundary":"open","g":1.0},
        "L_values":[2],"sizes":[4,6]}"#;
    let cfg = write_config(tmp.path(), "c.json", json);
    let out = tmp.path().join("out");
    assert_eq!(run("dichotomy", &cfg, &out).status.code(), Some(0));
    for n in [4, 6] {
        let moments = csv_column(&out.join(format!("moments_N{n}.csv")), "moment");
        assert_eq!(moments.len(), 4 * n * n);
        assert!(moments.iter().all(|m| (m.parse::<f64>().unwrap() - 1.0).abs() < 1e-12));
    }
    let verdict = read_json(&out.join("dichotomy.json"))["verdict"].clone();
    assert_eq!(verdict["phase_guess"], "trivial");
    assert!(verdict["marker_value"].as_f64().unwrap().abs() < 1e-8);
    assert_manifest_complete(&out);
}

#[test]
fn estimates_atomic_observables() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &atomic_config(6, "[1,2,3]"));
    let out = tmp.path().join("out");
    let res = run("estimates", &cfg, &out);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let mut r = csv::Reader::from_path(out.join("series_approx.csv")).unwrap();
    for rec in r.records() {
        let rec = rec.unwrap();
        let l: f64 = rec[1].parse().unwrap();
        let v: f64 = rec[2].parse().unwrap();
        // the window [-L, L) misses the labels on the upper edges of |m| <= L
        assert!((v - (4.0 * l + 1.0).sqrt()).abs() < 1e-9);
    }
    for name in ["near_bd", "far_bd", "pl_chern", "p_x_pl"] {
        let values = csv_column(&out.join(format!("series_{name}.csv")), "value");
        assert!(values.iter().all(|v| v.parse::<f64>().unwrap() <= 1e-7), "{name}");
    }
    let summary = read_json(&out.join("estimates_summary.json"));
    for s in summary["series"].as_array().unwrap() {
        let zero = s["numerically_zero"].as_bool().unwrap();
        assert_eq!(zero, s["name"] != "approx", "{s}");
    }
    assert_manifest_complete(&out);
}

#[test]
fn estimates_toggles_select_series() {
    let tmp = tempfile::tempdir().unwrap();
    let json = r#"{"model":{"kind":"atomic_limit","N":4,"u":0.0,"W":0.0,"seed":0,"boundary":"open","g":1.0},
        "L_values":[1,2],"toggles":{"far_bd":false,"approx":false,"pl_chern":false,"p_x_pl":false}}"#;
    let cfg = write_config(tmp.path(), "c.json", json);
    let out = tmp.path().join("out");
    assert_eq!(run("estimates", &cfg, &out).status.code(), Some(0));
    assert!(out.join("series_near_bd.csv").exists());
    assert!(!out.join("series_far_bd.csv").exists());
    assert!(!out.join("series_approx.csv").exists());
    assert!(read_json(&out.join("estimates_summary.json"))["decay_trick"].is_object());
}
