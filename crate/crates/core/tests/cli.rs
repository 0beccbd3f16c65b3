use std::path::Path;
use std::process::{Command, Output};

use cogrelay::sweep::CSV_HEADER;

const CONFIG: &str = r#"
[primary]
rate = 1.0
snr_db = 15.0

[secondary]
scenario = "a"
max_source_snr_db = 20.0
max_relay_snr_db = 20.0

[links.default]
m = 2
mean_gain = 1.0

[links.pt_s1]
m = 1
mean_gain = 0.05

[links.pt_s2]
m = 1
mean_gain = 0.05

[links.pt_r]
m = 1
mean_gain = 0.05

[sweep.short]
x_axis = "primary_snr_db"
start_db = 10.0
stop_db = 20.0
step_db = 5.0
thresholds = [0.1]
trials = 3000
seed = 11
"#;

fn cogrelay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cogrelay"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn sweep_writes_csv_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = cogrelay(&["--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 4);
}

#[test]
fn output_file_matches_stdout_and_repeats_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let file = dir.path().join("out.csv");
    let a = cogrelay(&["--config", &cfg, "--output", file.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0));
    assert!(a.stdout.is_empty());
    let b = cogrelay(&["--config", &cfg]);
    assert_eq!(std::fs::read(&file).unwrap(), b.stdout);
    let c = cogrelay(&["--config", &cfg]);
    assert_eq!(b.stdout, c.stdout);
}

#[test]
fn seed_override_changes_only_simulated_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let a = String::from_utf8(cogrelay(&["--config", &cfg]).stdout).unwrap();
    let b = String::from_utf8(cogrelay(&["--config", &cfg, "--seed", "12"]).stdout).unwrap();
    assert_ne!(a, b);
    for (x, y) in a.lines().zip(b.lines()).skip(1) {
        let x: Vec<&str> = x.split(',').collect();
        let y: Vec<&str> = y.split(',').collect();
        for col in [0, 1, 2, 3, 6, 9, 10] {
            assert_eq!(x[col], y[col]);
        }
    }
}

#[test]
fn analytic_only_leaves_simulation_empty() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = cogrelay(&["--config", &cfg, "--analytic-only"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert!(!cols[3].is_empty());
        assert!(cols[4].is_empty() && cols[5].is_empty() && cols[7].is_empty());
    }
}

#[test]
fn empty_range_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &CONFIG.replace("start_db = 10.0", "start_db = 30.0"));
    let out = cogrelay(&["--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), format!("{CSV_HEADER}\n"));
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.toml");
    assert_eq!(cogrelay(&["--config", missing.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(cogrelay(&[]).status.code(), Some(2));

    let cfg = write_config(dir.path(), &CONFIG.replace("rate = 1.0", "rate = -1.0"));
    let out = cogrelay(&["--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let cfg = write_config(dir.path(), CONFIG);
    assert_eq!(cogrelay(&["--config", &cfg, "--sweep", "nope"]).status.code(), Some(2));
    assert_eq!(cogrelay(&["--config", &cfg, "--bogus"]).status.code(), Some(2));
}

#[test]
fn selfcheck_passes_and_detects_perturbation() {
    let ok = cogrelay(&["--selfcheck"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let bad = cogrelay(&["--selfcheck", "--perturb", "1e-3"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL"));
}
