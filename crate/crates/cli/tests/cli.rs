//! End-to-end checks of the compiled binary: argument handling, exit
//! codes, environment overrides, and subcommand outputs.

use std::path::Path;
use std::process::Command;

use goprune_core::checkpoint::save_checkpoint;
use goprune_core::tensor::{Dims, LayerSet, Tensor4};

const BIN: &str = env!("CARGO_BIN_EXE_goprune");

fn write_mlp_config(dir: &Path, method: &str, p: f64, out: &str) -> std::path::PathBuf {
    let text = format!(
        r#"
[model]
arch = "mlp"
dim = 16
hidden = 8
n_classes = 3

[data]
source = "blobs"
n_samples = 200
data_seed = 5

[run]
method = "{method}"
seeds = [0]
out = "{out}"
train_epochs = 2
prune_ratio = 0.5
finetune_epochs = 2

[hyper]
p = {p}
outer_epochs = 2
batch_size = 32
"#
    );
    let path = dir.join("cfg.toml");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn unknown_subcommand_exits_1() {
    let s = Command::new(BIN).arg("frobnicate").output().unwrap();
    assert_eq!(s.status.code(), Some(1));
}

#[test]
fn missing_config_exits_1() {
    let s = Command::new(BIN).args(["pipeline", "--config", "/nonexistent.toml"]).output().unwrap();
    assert_eq!(s.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&s.stderr).contains("cannot read config"));
}

#[test]
fn admm_with_p_zero_rejected_naming_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_mlp_config(dir.path(), "admm", 0.0, "ignored");
    let s = Command::new(BIN)
        .args(["pipeline", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(s.status.code(), Some(1));
    let err = String::from_utf8_lossy(&s.stderr);
    assert!(err.contains("admm requires p in (0,1)"), "stderr: {err}");
}

#[test]
fn flag_overrides_env_overrides_config_for_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_out = dir.path().join("from_config");
    let env_out = dir.path().join("from_env");
    let flag_out = dir.path().join("from_flag");
    let cfg = write_mlp_config(dir.path(), "goprune", 0.5, cfg_out.to_str().unwrap());

    // env var wins over the config file
    let s = Command::new(BIN)
        .args(["pipeline", "--config"])
        .arg(&cfg)
        .env("GOPRUNE_OUT", &env_out)
        .output()
        .unwrap();
    assert!(s.status.success());
    assert!(env_out.join("report.csv").exists());
    assert!(!cfg_out.exists());

    // flag wins over the env var
    let s = Command::new(BIN)
        .args(["pipeline", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&flag_out)
        .env("GOPRUNE_OUT", dir.path().join("unused"))
        .output()
        .unwrap();
    assert!(s.status.success());
    assert!(flag_out.join("report.csv").exists());
    assert!(!dir.path().join("unused").exists());
}

#[test]
fn histogram_of_known_tensor_is_hand_countable() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("ckpt");
    let mut ls = LayerSet::new();
    ls.push("w", Tensor4::from_vec(Dims::new(4, 1, 1, 1), vec![0.0, 0.1, 0.5, 1.0]).unwrap())
        .unwrap();
    save_checkpoint(&stem, &ls).unwrap();
    let out = dir.path().join("h.csv");
    let s = Command::new(BIN)
        .args(["histogram", "--bins", "2", "--range-max", "1.0", "--checkpoint"])
        .arg(&stem)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(s.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let counts: Vec<&str> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(counts, vec!["2", "2"]);
}

#[test]
fn histogram_missing_checkpoint_exits_1() {
    let s = Command::new(BIN)
        .args(["histogram", "--checkpoint", "/nonexistent/stem"])
        .output()
        .unwrap();
    assert_eq!(s.status.code(), Some(1));
}

#[test]
fn prox_check_fault_injection_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pc.csv");
    let s = Command::new(BIN)
        .args(["prox-check", "--samples", "100", "--inject-kappa-fault", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(s.status.code(), Some(2));

    let s = Command::new(BIN)
        .args(["prox-check", "--samples", "100", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(s.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "a,lambda,p,prox_value,oracle_value,objective_gap");
    assert_eq!(text.lines().count(), 101);
}

#[test]
fn p_sweep_single_value_runs_and_duplicates_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_mlp_config(dir.path(), "goprune", 0.5, "ignored");
    let out = dir.path().join("sweep");
    let s = Command::new(BIN)
        .args(["p-sweep", "--config"])
        .arg(&cfg)
        .args(["--p-values", "0.5", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(s.status.success(), "stderr: {}", String::from_utf8_lossy(&s.stderr));
    let text = std::fs::read_to_string(out.join("p_sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);

    let s = Command::new(BIN)
        .args(["p-sweep", "--config"])
        .arg(&cfg)
        .args(["--p-values", "0.5,0.5", "--out"])
        .arg(dir.path().join("dup"))
        .output()
        .unwrap();
    assert_eq!(s.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&s.stderr).contains("duplicate p value"));
}

#[test]
fn pipeline_flag_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_mlp_config(dir.path(), "goprune", 0.5, "ignored");
    let out = dir.path().join("o");
    let s = Command::new(BIN)
        .args(["pipeline", "--config"])
        .arg(&cfg)
        .args(["--ratio", "0.25", "--seeds", "3,4", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(s.status.success());
    let report = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(report.lines().any(|l| l.starts_with("3,")));
    assert!(report.lines().any(|l| l.starts_with("4,")));
    assert!(!report.lines().any(|l| l.starts_with("0,")));
    assert!(out.join("seed3_mask.txt").exists());
}
