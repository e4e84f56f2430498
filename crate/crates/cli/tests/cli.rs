use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SYSTEM: &str = r#"{"hamiltonian": [[[0.5,0],[0.2,0.1]],[[0.2,-0.1],[-0.5,0]]], "psi0": [[1,0],[0,0]]}"#;
const PAIR: &str = r#"{"factors": [["a",2],["b",2]], "bipartition": {"a":["a"],"b":["b"]},
  "hamiltonian": [[[1,0],[0,0],[0,0],[0,0]],[[0,0],[-1,0],[2,0],[0,0]],[[0,0],[2,0],[-1,0],[0,0]],[[0,0],[0,0],[0,0],[1,0]]],
  "temperatures": [0.5, 1, 2, 4]}"#;

fn emergent(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emergent"))
        .current_dir(dir)
        .env_remove("EMERGENT_OUT_DIR")
        .args(args)
        .output()
        .expect("spawn emergent")
}

fn setup() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("sys.json"), SYSTEM).unwrap();
    std::fs::write(dir.path().join("pair.json"), PAIR).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))).unwrap()
}

fn docs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs")
}

fn assert_valid(schema_file: &str, doc: &Value) {
    let schema = read_json(docs().join(schema_file));
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{schema_file}: {errors:#?}");
}

#[test]
fn clock_example() {
    let dir = setup();
    let o = emergent(dir.path(), &["clock", "--d", "64", "--system", "sys.json", "--out", "out/"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("out/clock_ticks.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("tick,fidelity,residual"));
    assert_eq!(lines.count(), 64);
    let report = read_json(dir.path().join("out/clock_report.json"));
    assert_eq!(report["schema_version"], "1");
    assert!(report["min_fidelity"].as_f64().unwrap() > 1.0 - 1e-12);
}

#[test]
fn blackhole_example() {
    let dir = setup();
    let o = emergent(dir.path(), &["tunnel", "--preset", "blackhole", "--mass-solar", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc = read_json(dir.path().join("out/tunnel_blackhole.json"));
    let t = doc["hawking_temperature_K"].as_f64().unwrap();
    assert!(((t - 6.17e-8) / 6.17e-8).abs() < 1e-3, "{t}");
    let csv = std::fs::read_to_string(dir.path().join("out/tunnel_blackhole_sweep.csv")).unwrap();
    // Oracle column is present but NaN when the oracle is off.
    assert!(csv.lines().nth(1).unwrap().ends_with(",NaN"));
}

#[test]
fn cmb_example() {
    let dir = setup();
    let o = emergent(dir.path(), &["witness", "cmb", "--T", "3", "--dTrel", "1e-5", "--p", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("omega bound = 3.927"), "{}", stdout(&o));
    let doc = read_json(dir.path().join("out/witness_cmb.json"));
    assert_eq!(doc["in_gravitational_wave_band"], true);
}

#[test]
fn outputs_match_schemas() {
    let dir = setup();
    std::fs::write(dir.path().join("bar.json"), r#"{"points": [[0, 1], [1, 2], [2, 0]]}"#).unwrap();
    for args in [
        vec!["clock", "--system", "sys.json"],
        vec!["thermal", "--sweep", "8,16"],
        vec!["tunnel", "--preset", "blackhole", "--oracle", "--omega-fractions", "0.01,0.1"],
        vec!["tunnel", "--preset", "universe"],
        vec!["tunnel", "--preset", "custom-barrier", "--barrier", "bar.json"],
        vec!["cosmo"],
        vec!["witness", "--system", "pair.json", "--ree", "--ree-restarts", "2", "--ree-iterations", "200"],
        vec!["witness", "cmb"],
    ] {
        let o = emergent(dir.path(), &args);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
    }
    let out = dir.path().join("out");
    for (file, schema) in [
        ("clock_report.json", "clock_report.schema.json"),
        ("thermal_report.json", "thermal_report.schema.json"),
        ("tunnel_blackhole.json", "tunnel_blackhole.schema.json"),
        ("tunnel_universe.json", "tunnel_universe.schema.json"),
        ("tunnel_barrier.json", "tunnel_barrier.schema.json"),
        ("cosmo_epochs.json", "cosmo_epochs.schema.json"),
        ("witness_report.json", "witness_report.schema.json"),
        ("witness_cmb.json", "witness_cmb.schema.json"),
    ] {
        assert_valid(schema, &read_json(out.join(file)));
    }
    assert_valid("clock_system.schema.json", &serde_json::from_str(SYSTEM).unwrap());
    assert_valid("witness_system.schema.json", &serde_json::from_str(PAIR).unwrap());
    assert_valid("barrier_table.schema.json", &read_json(dir.path().join("bar.json")));
}

#[test]
fn input_examples_match_schemas() {
    let cosmo: Value = serde_json::from_str(
        r#"{"alpha": "paper-default", "a0": 1, "rho0": 59, "t_end": 10, "grid": {"kind": "uniform", "n": 100}, "units": "natural"}"#,
    )
    .unwrap();
    assert_valid("cosmo_config.schema.json", &cosmo);
    let bath: Value =
        serde_json::from_str(r#"{"kind": "synthetic_degeneracy", "levels": [{"energy": 0, "degeneracy": 4}, {"energy": -1, "degeneracy": 2}]}"#)
            .unwrap();
    assert_valid("bath_table.schema.json", &bath);

    let rejects = |schema_file: &str, doc: &str| {
        let schema = read_json(docs().join(schema_file));
        !jsonschema::validator_for(&schema).unwrap().is_valid(&serde_json::from_str(doc).unwrap())
    };
    assert!(rejects(
        "cosmo_config.schema.json",
        r#"{"a0": 1, "rho0": 1, "t_end": 1, "grid": {"kind": "uniform", "n": 2}}"#
    ));
    assert!(rejects("witness_cmb.schema.json", r#"{"kind": "witness_cmb", "schema_version": "2"}"#));
    assert!(rejects("bath_table.schema.json", r#"{"kind": "spin_bath", "spins": 0, "spacing": 1}"#));
}

#[test]
fn cosmo_columns_and_empty_trajectory() {
    let dir = setup();
    std::fs::write(
        dir.path().join("empty.json"),
        r#"{"alpha": 0.01, "a0": 1, "rho0": 1, "t_end": 1, "grid": {"kind": "times", "times": []}, "units": "natural"}"#,
    )
    .unwrap();
    let o = emergent(dir.path(), &["cosmo", "--config", "empty.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(dir.path().join("out/cosmo_trajectory.csv")).unwrap(), "t,a,rho,H,epoch\n");
}

#[test]
fn witness_grid_columns_and_bits() {
    let dir = setup();
    let o = emergent(dir.path(), &["witness", "--system", "pair.json", "--entropy-unit", "bits"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("out/witness_grid.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("T,S_thermal,C,verdict,margin"));
    assert_eq!(csv.lines().count(), 5);
    let doc = read_json(dir.path().join("out/witness_report.json"));
    assert_eq!(doc["entropy_unit"], "bits");
    assert!((doc["ground_entanglement"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn output_dir_from_environment() {
    let dir = setup();
    let o = Command::new(env!("CARGO_BIN_EXE_emergent"))
        .current_dir(dir.path())
        .env("EMERGENT_OUT_DIR", "elsewhere")
        .args(["witness", "cmb"])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("elsewhere/witness_cmb.json").exists());
}

#[test]
fn input_errors_exit_2() {
    let dir = setup();
    std::fs::write(
        dir.path().join("bad.json"),
        r#"{"alpha": 0.1, "a0": "x", "rho0": 1, "t_end": 1, "grid": {"kind": "uniform", "n": 2}}"#,
    )
    .unwrap();
    std::fs::write(dir.path().join("blocker"), "").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec![],
        vec!["clock", "--d", "1", "--system", "sys.json"],
        vec!["clock", "--system", "missing.json"],
        vec!["cosmo", "--config", "bad.json"],
        vec!["tunnel", "--preset", "blackhole", "--mass-kg", "-1"],
        vec!["tunnel", "--preset", "blackhole", "--omega-fractions", "1.5"],
        vec!["witness", "cmb", "--T", "-3"],
        vec!["witness", "cmb", "--out", "blocker/sub"],
        vec!["thermal", "--bogus"],
    ];
    for args in cases {
        let o = emergent(dir.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
    let o = emergent(dir.path(), &["cosmo", "--config", "bad.json"]);
    assert!(stderr(&o).contains("bad.json") && stderr(&o).contains("a0"), "{}", stderr(&o));
}

#[test]
fn numerical_failure_exits_3() {
    let dir = setup();
    std::fs::write(
        dir.path().join("stiff.json"),
        r#"{"alpha": 0, "a0": 1, "rho0": 1e300, "t_end": 1e300, "grid": {"kind": "uniform", "n": 1}, "units": "natural"}"#,
    )
    .unwrap();
    let o = emergent(dir.path(), &["cosmo", "--config", "stiff.json"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(!dir.path().join("out/cosmo_trajectory.csv").exists());
}

#[test]
fn selftest_passes() {
    let dir = setup();
    let o = emergent(dir.path(), &["--selftest"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
    let o = emergent(dir.path(), &["tunnel", "--selftest"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.lines().all(|l| l.starts_with("PASS tunnel:")), "{out}");
}
