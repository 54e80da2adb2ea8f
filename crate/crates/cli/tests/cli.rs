use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use raman_comb::io::read_ensemble;
use raman_comb::manifest::MANIFEST_NAME;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_raman-comb"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

/// The minimal configuration with one line replaced.
fn minimal_with(dir: &Path, from: &str, to: &str) -> PathBuf {
    let text = fs::read_to_string(configs().join("minimal.toml")).unwrap();
    assert!(text.contains(from), "{from}");
    let path = dir.join("config.toml");
    fs::write(&path, text.replace(from, to)).unwrap();
    path
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    bin()
        .args(args)
        .arg("-c")
        .arg(config)
        .arg("-o")
        .arg(out)
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn files_except_manifest(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| !p.ends_with(MANIFEST_NAME))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.file_name().unwrap().into(), fs::read(&p).unwrap()))
        .collect()
}

#[test]
fn minimal_simulation_writes_ensemble_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = run(&["simulate"], &configs().join("minimal.toml"), &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let printed: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(printed["shots"], 10);

    let (config, ens) = read_ensemble(&out.join("ensemble.rce")).unwrap();
    assert_eq!(ens.shots(), 10);
    assert_eq!(ens.fibers(), 2);
    assert_eq!(config.seed, 1);

    let manifest = json(&out.join(MANIFEST_NAME));
    assert_eq!(manifest["subcommand"], "simulate");
    assert_eq!(manifest["master_seed"], 1);
    let listed: Vec<&str> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["path"].as_str().unwrap())
        .collect();
    for name in ["ensemble.rce", "config.toml", "energies.csv", "summary.json"] {
        assert!(listed.contains(&name), "{name} missing from {listed:?}");
    }
}

#[test]
fn rerun_reproduces_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let config = configs().join("minimal.toml");
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(run(&["reproduce-fig2", "--threads", "1"], &config, &a).status.success());
    assert!(run(&["reproduce-fig2", "--threads", "2"], &config, &b).status.success());
    let fa = files_except_manifest(&a);
    assert!(fa.len() > 5);
    assert_eq!(fa, files_except_manifest(&b));
}

#[test]
fn analyze_reopens_a_stored_ensemble() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = tmp.path().join("sim");
    assert!(run(&["simulate"], &configs().join("minimal.toml"), &sim)
        .status
        .success());
    let out = tmp.path().join("analysis");
    let o = bin()
        .args(["analyze", "-e"])
        .arg(sim.join("ensemble.rce"))
        .arg("-o")
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = json(&out.join("summary.json"));
    assert_eq!(summary["shots"], 10);
    assert_eq!(summary["master_seed"], 1);
    // Ten shots are too few for the uniformity test.
    assert!(summary["lines"][1]["fringe_phase"]["uniformity"].is_null());
    assert!(out.join("fits.csv").exists());
}

#[test]
fn zero_gain_leaves_flat_vacuum_curves() {
    let tmp = tempfile::tempdir().unwrap();
    let config = minimal_with(tmp.path(), "gain = 4.0", "gain = 0.0");
    let out = tmp.path().join("m");
    assert!(run(&["moments"], &config, &out).status.success());
    let summary = json(&out.join("summary.json"));
    let vacuum = summary["vacuum_level"].as_f64().unwrap();
    assert!(summary["central_min_correlation"].is_null());
    assert!(summary["stokes_crossing"].is_null());
    for name in ["intensity_s1.csv", "intensity_as1.csv"] {
        let mut reader = csv::Reader::from_path(out.join(name)).unwrap();
        for row in reader.records() {
            let v: f64 = row.unwrap()[1].parse().unwrap();
            assert_eq!(v, vacuum);
        }
    }
    let mut reader = csv::Reader::from_path(out.join("correlation.csv")).unwrap();
    assert!(reader.records().all(|r| r.unwrap()[1].is_empty()));
}

#[test]
fn invalid_grid_exits_2_naming_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let config = minimal_with(tmp.path(), "nz = 32", "nz = 0");
    let o = run(&["simulate"], &config, &tmp.path().join("o"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid.nz"));
}

#[test]
fn unknown_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let config = minimal_with(tmp.path(), "shots = 10", "shots = 10\nshotz = 3");
    let o = run(&["simulate"], &config, &tmp.path().join("o"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("shotz"));
}

#[test]
fn unwritable_output_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = run(&["moments"], &configs().join("minimal.toml"), &blocker.join("sub"));
    assert_eq!(o.status.code(), Some(4));
    let o = run(&["moments"], &tmp.path().join("missing.toml"), &tmp.path().join("o"));
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn numerical_guards_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let config = minimal_with(tmp.path(), "gain = 4.0", "gain = 40.0");
    let o = run(&["simulate"], &config, &tmp.path().join("o"));
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("refine the grid"));

    let config = minimal_with(
        tmp.path(),
        "ntau = 32",
        "ntau = 32\n\n[integrator]\ndepletion_limit = 1e-20",
    );
    let o = run(&["simulate"], &config, &tmp.path().join("p"));
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("of the pump energy"));
}
