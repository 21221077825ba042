use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use floquet_cli::config::{ModulationConfig, SystemConfig};
use floquet_cli::{parse_config, parse_config_str, run_scenario, ConfigError, RunOptions, ScenarioConfig};
use floquet_core::thermo::ThermoReport;

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn bundled() -> Vec<PathBuf> {
    let mut v: Vec<_> = fs::read_dir(scenario_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    v.sort();
    v
}

fn load(name: &str) -> ScenarioConfig {
    parse_config(&scenario_dir().join(format!("{name}.json"))).unwrap()
}

fn steady_report(name: &str) -> ThermoReport {
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_scenario(
        &load(name),
        &RunOptions {
            out_dir: Some(dir.path().to_path_buf()),
            mode: None,
        },
    )
    .unwrap();
    assert!(outcome.violations.is_empty(), "{:?}", outcome.violations);
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("thermo_report.json")).unwrap()).unwrap();
    serde_json::from_value(v["report"].clone()).unwrap()
}

#[test]
fn bundled_configs_round_trip() {
    for path in bundled() {
        let cfg = parse_config(&path).unwrap();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let again = parse_config_str(&text, &scenario_dir()).unwrap();
        assert_eq!(cfg, again, "{}", path.display());
        assert_eq!(text, serde_json::to_string_pretty(&again).unwrap());
    }
}

#[test]
fn defaults_are_filled_at_parse_time() {
    let text = r#"{
        "system": { "kind": "qubit", "omega0": 1.0, "drive_frequency": 0.5, "modulation": { "shape": "pulse_train" } },
        "baths": [
            { "label": "h", "temperature": 1.0, "spectrum": { "model": "flat", "gamma0": 0.1 } },
            { "label": "c", "temperature": 0.2, "spectrum": { "model": "flat", "gamma0": 0.1 } }
        ]
    }"#;
    let cfg = parse_config_str(text, Path::new(".")).unwrap();
    assert_eq!(cfg.floquet.q_max, Some(31));
    assert_eq!(cfg.floquet.grid_n, Some(256));
    assert_eq!(cfg.floquet.steps_per_period, Some(1024));
    assert!(cfg.floquet.integrator.is_some());
}

#[test]
fn non_positive_temperature_names_the_bath() {
    let text = r#"{
        "system": { "kind": "qubit", "omega0": 1.0, "modulation": { "shape": "constant" } },
        "baths": [
            { "label": "warm", "temperature": 1.0, "spectrum": { "model": "flat", "gamma0": 0.1 } },
            { "label": "frozen", "temperature": 0.0, "spectrum": { "model": "flat", "gamma0": 0.1 } }
        ]
    }"#;
    let err = parse_config_str(text, Path::new(".")).unwrap_err();
    let msg = err.to_string();
    assert!(matches!(err, ConfigError::Invalid { .. }));
    assert!(msg.contains("baths[1]") && msg.contains("frozen"), "{msg}");
}

#[test]
fn unknown_keys_rejected_with_path() {
    let text = r#"{
        "system": { "kind": "qubit", "omega0": 1.0, "modulation": { "shape": "constant" } },
        "baths": [ { "label": "a", "temperature": 1.0, "spectrum": { "model": "flat", "gamma0": 0.1, "gamma": 2 } } ]
    }"#;
    let msg = parse_config_str(text, Path::new(".")).unwrap_err().to_string();
    assert!(msg.starts_with("baths[0].spectrum"), "{msg}");
    assert!(msg.contains("gamma"), "{msg}");

    let text = r#"{ "system": { "kind": "qubit", "omega0": 1.0, "modulation": { "shape": "constant" } }, "baths": [], "extra": 1 }"#;
    assert!(parse_config_str(text, Path::new("."))
        .unwrap_err()
        .to_string()
        .contains("extra"));
}

#[test]
fn generic_coupling_must_name_a_bath() {
    let text = r#"{
        "system": { "kind": "generic", "dim": 2,
            "hamiltonian": { "form": "constant", "matrix": { "re": [[1, 0], [0, -1]] } },
            "couplings": [ { "bath": "nowhere", "operator": { "re": [[0, 1], [1, 0]] } } ] },
        "baths": [ { "label": "a", "temperature": 1.0, "spectrum": { "model": "flat", "gamma0": 0.1 } } ]
    }"#;
    let msg = parse_config_str(text, Path::new(".")).unwrap_err().to_string();
    assert!(msg.contains("system.couplings[0].bath"), "{msg}");
}

#[test]
fn tabulated_csv_is_inlined() {
    let cfg = load("tabulated_qubit_engine");
    let SystemConfig::Qubit { omega0, modulation, .. } = &cfg.system else {
        panic!("qubit expected")
    };
    let ModulationConfig::Tabulated { csv, times, .. } = modulation else {
        panic!("tabulated expected")
    };
    assert!(csv.is_none());
    assert_eq!(times.len(), 65);
    assert!((omega0.unwrap() - 1.2).abs() < 1e-2);
}

#[test]
fn pulse_single_bath_regression() {
    let r = steady_report("pulse_qubit_single_bath");
    assert!(r.second_law_margin <= 0.0);
    // the drive pumps work in and the bath absorbs it as heat
    assert!(r.per_bath[0].current < 0.0);
    assert!(r.power > 0.0);
}

#[test]
fn static_conduction_regression() {
    let r = steady_report("static_two_bath_conduction");
    assert!((r.per_bath[0].current + r.per_bath[1].current).abs() <= 1e-9);
    assert!(r.power.abs() <= 1e-9);
    assert!(r.per_bath[0].current > 0.0);
}

#[test]
fn no_drive_equilibrium_regression() {
    let r = steady_report("no_drive_equilibrium");
    for b in &r.per_bath {
        assert!(b.current.abs() <= 1e-10);
    }
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    for name in [
        "sinusoidal_drive_sweep",
        "parity_qutrit_relaxation",
        "static_two_bath_conduction",
    ] {
        let cfg = load(name);
        let dirs: Vec<_> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
        let mut files = Vec::new();
        for d in &dirs {
            let outcome = run_scenario(
                &cfg,
                &RunOptions {
                    out_dir: Some(d.path().to_path_buf()),
                    mode: None,
                },
            )
            .unwrap();
            files = outcome
                .files
                .iter()
                .map(|f| f.file_name().unwrap().to_owned())
                .collect::<Vec<_>>();
        }
        assert!(!files.is_empty());
        for f in &files {
            let a = fs::read(dirs[0].path().join(f)).unwrap();
            let b = fs::read(dirs[1].path().join(f)).unwrap();
            assert!(a == b, "{name}/{f:?} differs between runs");
        }
    }
}

#[test]
fn sweep_rows_sorted_by_axis() {
    let dir = tempfile::tempdir().unwrap();
    run_scenario(
        &load("sinusoidal_drive_sweep"),
        &RunOptions {
            out_dir: Some(dir.path().to_path_buf()),
            mode: None,
        },
    )
    .unwrap();
    let mut rd = csv::Reader::from_path(dir.path().join("sweep.csv")).unwrap();
    let header = rd.headers().unwrap().clone();
    assert_eq!(&header[0], "drive_frequency");
    assert_eq!(&header[1], "J_h [meV]");
    let axis: Vec<f64> = rd.records().map(|r| r.unwrap()[0].parse().unwrap()).collect();
    assert_eq!(axis.len(), 8);
    assert!(axis.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn evolve_trajectory_columns() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_scenario(
        &load("parity_qutrit_relaxation"),
        &RunOptions {
            out_dir: Some(dir.path().to_path_buf()),
            mode: None,
        },
    )
    .unwrap();
    assert!(outcome.violations.is_empty());
    let mut rd = csv::Reader::from_path(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(
        rd.headers().unwrap().iter().collect::<Vec<_>>(),
        ["t", "p0", "p1", "p2", "entropy", "sigma"]
    );
    for rec in rd.records() {
        let rec = rec.unwrap();
        let p: f64 = (1..4).map(|k| rec[k].parse::<f64>().unwrap()).sum();
        assert!((p - 1.0).abs() < 1e-10);
        assert!(rec[5].parse::<f64>().unwrap() >= -1e-10);
    }
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_floquet-thermo");
    let ok = Command::new(bin)
        .args(["validate"])
        .arg(scenario_dir().join("static_two_bath_conduction.json"))
        .output()
        .unwrap();
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("ok: static_two_bath_conduction"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{ "system": { "kind": "qubit", "omega0": 1.0, "modulation": { "shape": "constant" } }, "baths": [ { "label": "x", "temperature": -1.0, "spectrum": { "model": "flat", "gamma0": 0.1 } } ] }"#).unwrap();
    let out = Command::new(bin).arg("validate").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`x`"));

    let pq = Command::new(bin)
        .arg("pq")
        .arg(scenario_dir().join("pulse_qubit_single_bath.json"))
        .output()
        .unwrap();
    assert!(pq.status.success());
    let text = String::from_utf8(pq.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("q,xi_re,xi_im,p"));
    assert_eq!(text.lines().count(), 1 + 63);
}
