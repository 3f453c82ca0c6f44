use std::fs;
use std::path::Path;
use std::process::Command;

use bolab_cli::cli_run;
use bolab_core::experiments::{form_norm, ExperimentReport};
use bolab_core::harness::{config_hash, read_report, Manifest, RunConfig};
use bolab_core::wick::FormKind;
use bolab_core::EnsembleSpec;

fn run(args: &[&str], out: &Path) -> i32 {
    let mut argv = vec!["bolab".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    if !matches!(args.first(), Some(&"report")) {
        argv.push("--output-dir".into());
        argv.push(out.display().to_string());
    }
    cli_run(argv)
}

fn report(dir: &Path, name: &str) -> ExperimentReport {
    read_report(&dir.join(format!("{name}.json"))).unwrap()
}

#[test]
fn lattice_exact_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(&["lattice", "--form", "quartic-E1", "--N", "8", "--eps", "0.5", "--exact"], dir.path());
    assert_eq!(code, 0);
    let r = report(dir.path(), "lattice");
    let direct = form_norm(FormKind::QuarticE1, 8, 0.5, &EnsembleSpec::new(1, 1)).unwrap();
    assert_eq!(r.scalars[0].value, direct.value);
    assert_eq!(r.scalars[0].method, "exact");
}

#[test]
fn cancel_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["cancel-check", "--set", "g-split", "--N", "8", "--eps", "0.25", "--strict"], dir.path()), 0);
    let r = report(dir.path(), "cancel-check");
    assert!(r.passed());
    assert!(r.scalars[0].value <= 1e-12);
}

#[test]
fn evolve_conserves() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["evolve", "--N", "32", "--eps", "0.25", "--t", "1", "--samples", "2", "--check-conservation"];
    assert_eq!(run(&args, dir.path()), 0);
    let r = report(dir.path(), "evolve");
    assert!(r.scalars.iter().all(|s| s.value < 1e-8));
}

#[test]
fn manifest_reproduces_config() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["energy", "--N", "8", "--samples", "20", "--seed", "9"], dir.path()), 0);
    let m: Manifest = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    let cfg = RunConfig::parse_str(&m.config).unwrap();
    assert_eq!(m.config_sha256, config_hash(&cfg));
    assert_eq!(m.seeds, vec![9]);
    // rerunning from the saved config gives the same numbers
    let again = tempfile::tempdir().unwrap();
    let conf = dir.path().join("energy.conf");
    assert_eq!(run(&["energy", "--config", conf.to_str().unwrap()], again.path()), 0);
    assert_eq!(report(dir.path(), "energy").scalars, report(again.path(), "energy").scalars);
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["lattice", "--bogus"], dir.path()), 2);
    assert_eq!(run(&["evolve", "--N", "32", "--dt", "0.1"], dir.path()), 2);
    assert_eq!(run(&["lattice", "--N", "many"], dir.path()), 2);
    assert_eq!(run(&["lattice", "--form", "octic"], dir.path()), 2);
    assert_eq!(run(&["lattice", "--exact", "--mc"], dir.path()), 2);
    assert_eq!(run(&["nonsense"], dir.path()), 2);
    let conf = dir.path().join("c.conf");
    fs::write(&conf, "experiment = energy\n").unwrap();
    assert_eq!(run(&["lattice", "--config", conf.to_str().unwrap()], dir.path()), 2);
    fs::write(&conf, "experiment = energy\nbogus = 1\n").unwrap();
    assert_eq!(run(&["energy", "--config", conf.to_str().unwrap()], dir.path()), 2);
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["report", missing.to_str().unwrap()], dir.path()), 1);
}

#[test]
fn report_rerenders_tables() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["lattice", "--form", "quartic-E1", "--N", "16", "--eps-list", "0.5,0.4,0.3,0.2"];
    assert_eq!(run(&args, dir.path()), 0);
    let r = report(dir.path(), "lattice");
    assert_eq!(r.fits.len(), 1);
    let svg = dir.path().join("lattice_norms.svg");
    fs::remove_file(&svg).unwrap();
    let json = dir.path().join("lattice.json");
    assert_eq!(run(&["report", json.to_str().unwrap()], dir.path()), 0);
    assert!(svg.exists());
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_bolab");
    let ok = Command::new(bin)
        .args(["cancel-check", "--N", "6"])
        .env("BOLAB_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(dir.path().join("cancel-check.json").exists());
    let bad = Command::new(bin).args(["evolve", "--dt", "1"]).env("BOLAB_OUTPUT_DIR", dir.path()).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let stderr = String::from_utf8(bad.stderr).unwrap();
    assert_eq!(stderr.trim().lines().count(), 1);
    assert!(stderr.contains("CFL guard"));
    let help = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}
