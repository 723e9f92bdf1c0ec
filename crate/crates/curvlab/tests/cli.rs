use std::path::Path;
use std::process::{Command, Output};

use curvlab::config::ScenarioConfig;
use curvlab::report::{emit_results, CSV_HEADER};
use serde_json::Value;

fn curvlab(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_curvlab"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("CURVLAB_THREADS", t),
        None => cmd.env_remove("CURVLAB_THREADS"),
    };
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

fn read_manifest(dir: &Path, seed: u64) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join(format!("manifest_seed{seed}.json"))).unwrap()).unwrap()
}

#[test]
fn bounds_for_the_proximal_sampler() {
    let dir = tempfile::tempdir().unwrap();
    let o = curvlab(&["bounds", "--alpha", "1", "--L", "0.5", "--h", "1", "--ps", "--out", &out_arg(dir.path())], None);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(std::str::from_utf8(&o.stdout).unwrap().split("manifest:").next().unwrap()).unwrap();
    assert_eq!(v["K"], 0.5);
    assert_eq!(v["M"], 0.5);
    assert_eq!(v["wmix"]["up_to_constant"], true);
}

#[test]
fn lmc_step_above_inverse_smoothness_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"kernel": "lmc", "h": 2.0, "alpha": 1.0, "beta": 1.0}"#).unwrap();
    let o = curvlab(&["bounds", "--config", cfg.to_str().unwrap(), "--out", &out_arg(dir.path())], None);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("h > 1/beta"));
}

#[test]
fn minimal_bounds_config_is_valid() {
    let cfg = ScenarioConfig::from_json(r#"{"alpha": 1, "L": 0.5, "h": 0.1}"#).unwrap().resolve();
    cfg.validate().unwrap();
    assert_eq!(cfg.lipschitz(), 0.5);
}

#[test]
fn config_round_trip_is_identity() {
    let text = r#"{"kernel": "ps", "h": 0.5, "perturbation": "sinusoid", "amplitude": 0.5, "frequency": 1.0,
                  "pairs": [[0.0, 1.0], [-2.0, 2.5]], "eps": [0.1, 0.25], "seed": 9}"#;
    let cfg = ScenarioConfig::from_json(text).unwrap().resolve();
    let echo = cfg.echo();
    let again = ScenarioConfig::from_json(&echo.to_string()).unwrap();
    assert_eq!(again, cfg);
    assert_eq!(again.clone().resolve(), again);
    assert_eq!(again.echo(), echo);
}

#[test]
fn unknown_keys_are_rejected() {
    assert!(ScenarioConfig::from_json(r#"{"alpah": 1}"#).is_err());
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.json");
    std::fs::write(&cfg, r#"{"h": 0.1, "sampels": 10}"#).unwrap();
    let o = curvlab(&["bounds", "--config", cfg.to_str().unwrap(), "--out", &out_arg(dir.path())], None);
    assert_eq!(code(&o), 1);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&curvlab(&["frobnicate"], None)), 1);
    assert_eq!(code(&curvlab(&["bounds", "--no-such-flag"], None)), 1);
    assert_eq!(code(&curvlab(&["--help"], None)), 0);
    assert_eq!(code(&curvlab(&["bounds", "--ps", "--out", "/dev/null/x", "--h", "1"], None)), 1);
    assert_eq!(code(&curvlab(&["bounds", "--h", "1"], Some("zero"))), 1);
}

#[test]
fn heat_flow_reverse_bound_is_tight() {
    let dir = tempfile::tempdir().unwrap();
    let o = curvlab(
        &["verify-rte", "--ou", "--alpha", "0", "--T", "0.25", "--pair", "0,1", "--out", &out_arg(dir.path())],
        None,
    );
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(dir.path().join("rte_langevin_seed0.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    let row = reader.records().next().unwrap().unwrap();
    let margin: f64 = row[5].parse().unwrap();
    assert!(margin.abs() <= 1e-12);
    assert!((row[2].parse::<f64>().unwrap() - 1.0).abs() <= 1e-12);
    assert_eq!(&row[6], "true");
}

#[test]
fn failing_inequality_exits_two() {
    // a Gaussian start with variance 2 declared as T2(0, 0)
    let dir = tempfile::tempdir().unwrap();
    let o = curvlab(
        &[
            "verify-t2", "--ou", "--T", "0.1", "--init", "gaussian", "--var0", "2", "--J", "0", "--tests", "20",
            "--out", &out_arg(dir.path()),
        ],
        None,
    );
    assert_eq!(code(&o), 2);
    let m = read_manifest(dir.path(), 0);
    assert!(m["reports"][0]["failed"].as_u64().unwrap() > 0);
}

#[test]
fn empty_report_list_gives_empty_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, path) = emit_results("none", &[], &[], &Value::Null, 3, dir.path()).unwrap();
    assert!(manifest.files.is_empty() && manifest.reports.is_empty());
    assert!(path.exists());
}

#[test]
fn same_seed_gives_identical_checksums_for_any_worker_count() {
    let args = |dir: &Path| -> Vec<String> {
        [
            "verify-curvature", "--ps", "--h", "0.5", "--perturbation", "sinusoid", "--amplitude", "0.5",
            "--backward", "rejection", "--samples", "4000", "--pair-count", "6", "--seed", "42", "--out",
        ]
        .iter()
        .map(|s| s.to_string())
        .chain([out_arg(dir)])
        .collect()
    };
    let mut manifests = Vec::new();
    for threads in ["1", "1", "3"] {
        let dir = tempfile::tempdir().unwrap();
        let a = args(dir.path());
        let o = curvlab(&a.iter().map(String::as_str).collect::<Vec<_>>(), Some(threads));
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        manifests.push(std::fs::read(dir.path().join("manifest_seed42.json")).unwrap());
    }
    let first: Value = serde_json::from_slice(&manifests[0]).unwrap();
    assert_eq!(first["files"].as_array().unwrap().len(), 1);
    assert!(first["files"][0]["sha256"].as_str().unwrap().len() == 64);
    // the out directory is echoed, so compare everything else
    let strip = |bytes: &[u8]| {
        let mut v: Value = serde_json::from_slice(bytes).unwrap();
        v["config"]["out"] = Value::Null;
        v
    };
    assert_eq!(strip(&manifests[0]), strip(&manifests[1]));
    assert_eq!(strip(&manifests[0]), strip(&manifests[2]));
}

#[test]
fn config_echo_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let o = curvlab(
        &["verify-t2", "--ps", "--h", "1", "--N", "3", "--tests", "10", "--grid-nodes", "1024", "--seed", "5", "--out", &out_arg(&first)],
        None,
    );
    assert_eq!(code(&o), 0);
    let m = read_manifest(&first, 5);
    let cfg_path = dir.path().join("echo.json");
    std::fs::write(&cfg_path, m["config"].to_string()).unwrap();
    let second = dir.path().join("second");
    let o = curvlab(&["verify-t2", "--config", cfg_path.to_str().unwrap(), "--out", &out_arg(&second)], None);
    assert_eq!(code(&o), 0);
    let csv = "def_t2_proximal_seed5.csv";
    assert_eq!(std::fs::read(first.join(csv)).unwrap(), std::fs::read(second.join(csv)).unwrap());
    let mut again = read_manifest(&second, 5);
    assert_eq!(again["files"], m["files"]);
    again["config"]["out"] = m["config"]["out"].clone();
    assert_eq!(again, m);
}

#[test]
fn simulate_and_mixing_write_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = curvlab(&["simulate", "--lmc", "--h", "0.1", "--N", "5", "--x0", "-2", "--samples", "1000", "--out", &out_arg(dir.path())], None);
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("simulate_seed0.json").exists());
    let o = curvlab(
        &["mixing", "--ou", "--T", "0.05", "--x0", "4", "--max-steps", "200", "--eps", "0.25", "--eps", "0.1", "--out", &out_arg(dir.path())],
        None,
    );
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&std::fs::read(dir.path().join("mixing_seed0.json")).unwrap()).unwrap();
    assert!(v["curve"]["t_mix"][0].as_f64().unwrap() <= v["curve"]["t_mix"][1].as_f64().unwrap());
}
