use std::path::PathBuf;
use std::process::{Command, Output};

use ris_otfs::harness::{read_csv, read_jsonl};

fn sim() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sim"));
    cmd.env_remove("SIM_WORKERS");
    cmd
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("sim binary runs")
}

#[test]
fn shipped_configs_validate() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let out = run(sim().arg("validate-config").arg("--config").arg(&path));
        assert_eq!(out.status.code(), Some(0), "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8(out.stdout).unwrap().contains("[frame]"));
    }
}

#[test]
fn validate_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(sim().args(["validate-config", "--preset", "desk", "--override", "channel.q=16"]));
    assert_eq!(out.status.code(), Some(0));
    let path = dir.path().join("cfg.toml");
    std::fs::write(&path, &out.stdout).unwrap();
    let again = run(sim().arg("validate-config").arg("--config").arg(&path));
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(again.stdout, out.stdout);
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "frames = \"many\"\n").unwrap();
    let cases: Vec<Vec<String>> = vec![
        vec!["validate-config".into(), "--config".into(), bad.display().to_string()],
        vec!["validate-config".into(), "--config".into(), dir.path().join("missing.toml").display().to_string()],
        vec!["validate-config".into(), "--preset".into(), "desk".into(), "--override".into(), "nope=1".into()],
        vec!["run".into(), "--preset".into(), "desk".into(), "--override".into(), "qam_order=8".into()],
        vec!["sweep".into(), "--preset".into(), "desk".into(), "--axis".into(), "colour=red".into()],
    ];
    for args in cases {
        let out = run(sim().args(&args));
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn runtime_errors_exit_3() {
    // a basis larger than the number of pilots cannot be fitted
    let out = run(sim().args([
        "run", "--preset", "desk", "--frames", "1", "--override", "estimator=\"bem\"", "--override", "k_over=10",
    ]));
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn run_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = run(sim().args(["run", "--preset", "desk", "--frames", "4", "--seed", "9", "--out"]).arg(&path));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let records = read_csv(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0].frames_run, 4);
    assert_eq!(records[0].base_seed, 9);
    assert_eq!(records[0].wall_time_s, None);
}

#[test]
fn sweep_jsonl_is_independent_of_sim_workers() {
    let args = [
        "sweep", "--preset", "desk", "--frames", "6", "--format", "jsonl", "--axis", "snr=5,20", "--axis",
        "waveform=otfs,ofdm",
    ];
    let one = run(sim().args(args).env("SIM_WORKERS", "1"));
    let four = run(sim().args(args).env("SIM_WORKERS", "4"));
    assert_eq!(one.status.code(), Some(0), "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, four.stdout);
    let records = read_jsonl(one.stdout.as_slice()).unwrap();
    assert_eq!(records.len(), 4);
}
