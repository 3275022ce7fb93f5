use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use prlmc_lab::{Experiment, ExperimentConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_prlmc-lab"))
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

#[test]
fn shipped_configs_parse_and_name_their_experiment() {
    for experiment in Experiment::ALL {
        let path = configs_dir().join(format!("{}.json", experiment.name()));
        let cfg = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(cfg.experiment, Some(experiment));
        cfg.check(experiment).unwrap();
    }
}

const SMALL: &str = r#"{
    "sampler": {
        "algorithm": { "kind": "prlmc", "k": 2 },
        "potential": { "kind": "isotropic_quadratic", "theta": 1.0, "dimension": 1 },
        "schedule": { "kind": "constant", "eta": 0.1 },
        "initial": [1.0]
    },
    "trials": 2000,
    "steps": 20,
    "checkpoints": [5, 20],
    "master_seed": 9
}"#;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn run_writes_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", SMALL);
    let out = dir.path().join("out");
    let status = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--threads", "2"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0), "{}", String::from_utf8_lossy(&status.stdout));
    for f in ["summary.json", "checkpoints.csv", "step_5.bin", "step_20.bin"] {
        assert!(out.join("run").join(f).is_file(), "missing {f}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("run/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["master_seed"], 9);
    assert_eq!(summary["status"], "pass");
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", SMALL);
    let out = dir.path().join("out");
    let status = bin().args(["run", "--seed", "77", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert!(status.status.success());
    let summary = fs::read_to_string(out.join("run/summary.json")).unwrap();
    assert!(summary.contains("\"master_seed\": 77"));
}

#[test]
fn config_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("syntax.json", "{ not json".to_string()),
        ("unknown.json", SMALL.replace("\"trials\"", "\"trails\"")),
        ("mismatch.json", SMALL.replace("\"initial\": [1.0]", "\"initial\": [1.0, 2.0]")),
        ("wrong_experiment.json", SMALL.replacen('{', "{ \"experiment\": \"tv-decay\",", 1)),
        ("bad_eta.json", SMALL.replace("\"eta\": 0.1", "\"eta\": -0.1")),
    ];
    for (name, text) in cases {
        let cfg = write(dir.path(), name, &text);
        let out = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
        assert_eq!(out.status.code(), Some(3), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = bin().args(["drift-check", "--config"]).arg(dir.path().join("missing.json")).output().unwrap();
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn experiment_specific_validation_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    // Strong error needs at least three step sizes.
    let cfg = write(dir.path(), "c.json", SMALL);
    let out = bin().args(["strong-error", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}
