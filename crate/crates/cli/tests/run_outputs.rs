use std::fs;
use std::process::Command;

use atomlight_cli::{parse_spec, run_experiment};

fn small(preset: &str, extra: &str) -> atomlight_cli::ExperimentSpec {
    parse_spec(&format!("preset = {preset}\ngrid_points = 64\n{extra}")).unwrap()
}

#[test]
fn fringe_csv_contract() {
    let dir = tempfile::tempdir().unwrap();
    let written = run_experiment(&small("fringe", ""), dir.path()).unwrap();
    let text = fs::read_to_string(&written.data).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("phi,signal,noise,source"));
    assert_eq!(lines.clone().count(), 64);
    assert!(lines.all(|l| l.ends_with(",loop-engine") && l.split(',').count() == 4));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(&written.manifest).unwrap()).unwrap();
    assert_eq!(manifest["data_file"], "fringe.csv");
    assert!(manifest["resolved_config"]["atomic_decay"].is_number());
}

#[test]
fn sensitivity_is_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let spec = parse_spec("preset = sensitivity\ngrid_points = 256\n").unwrap();
    let written = run_experiment(&spec, dir.path()).unwrap();
    let text = fs::read_to_string(&written.data).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "phi_opt,slope,noise_std,delta_phi,sql,db_beyond_sql");
    assert_eq!(lines.len(), 2);
}

#[test]
fn json_lines_output() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small("cosine-benchmark", "format = json-lines\noutput = \"nested/bench.jsonl\"\n");
    let written = run_experiment(&spec, dir.path()).unwrap();
    assert!(written.data.ends_with("nested/bench.jsonl"));
    let text = fs::read_to_string(&written.data).unwrap();
    assert_eq!(text.lines().count(), 64);
    for line in text.lines() {
        let row: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(row["source"], "benchmark");
    }
}

#[test]
fn reruns_are_byte_identical() {
    for (preset, extra) in [("fringe", ""), ("destruction", "base = sawtooth\n"), ("atomic-phase", "")] {
        let spec = small(preset, extra);
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let first = fs::read(run_experiment(&spec, a.path()).unwrap().data).unwrap();
        let second = fs::read(run_experiment(&spec, b.path()).unwrap().data).unwrap();
        assert_eq!(first, second, "{preset}");
    }
}

fn cli(args: &[&str], out: &std::path::Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_atomlight"))
        .args(args)
        .env("ATOMLIGHT_OUT_DIR", out)
        .output()
        .unwrap()
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = cli(&["preset", "cosine-benchmark", "--set", "grid_points=32"], dir.path());
    assert_eq!(ok.status.code(), Some(0));
    assert!(dir.path().join("cosine-benchmark.csv").exists());
    assert!(dir.path().join("cosine-benchmark.csv.manifest.json").exists());

    let typo = cli(&["preset", "fringe", "--set", "gama_a=0.5"], dir.path());
    assert_eq!(typo.status.code(), Some(2));
    let err = String::from_utf8_lossy(&typo.stderr);
    assert!(err.contains("gama_a") && err.contains("gamma_a"), "{err}");

    let runaway = cli(&["preset", "fringe", "--set", "gamma_a=0", "--set", "grid_points=4", "--set", "max_loops=100"], dir.path());
    assert_eq!(runaway.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&runaway.stderr).contains("phi = "));

    let spec_file = dir.path().join("exp.spec");
    fs::write(&spec_file, "preset = cosine-benchmark\ngrid_points = 16\noutput = \"from_file.csv\"\n").unwrap();
    let run = cli(&["run", spec_file.to_str().unwrap()], dir.path());
    assert_eq!(run.status.code(), Some(0));
    assert!(dir.path().join("from_file.csv").exists());

    let list = cli(&["list-presets"], dir.path());
    assert!(String::from_utf8_lossy(&list.stdout).lines().count() == 6);
}
