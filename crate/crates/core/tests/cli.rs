use std::path::Path;
use std::process::{Command, Output};

use gslab::groundstate::{solve_ground_state, SampledWaveFunction, TrapPotential};
use gslab::io::{ground_state_samples, read_wavefunction, write_wavefunction};

fn gslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gslab")).args(args).output().expect("binary runs")
}

fn run_config(dir: &Path, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let mut args = vec!["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    gslab(&args)
}

fn read(dir: &Path, file: &str) -> String {
    std::fs::read_to_string(dir.join("out").join(file)).unwrap()
}

#[test]
fn classify_small_kappa_reports_regular() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(dir.path(), "scenario = classify\nkappa = 0.5\ntrap = harmonic\nfunction = indicator\n", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(read(dir.path(), "classify.csv").starts_with("verdict,Regular\n"));
}

#[test]
fn limit_spot_value() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(dir.path(), "scenario = limit\nnu = 1\nmu = 1\nfunctions = 3\n", &[]);
    assert_eq!(o.status.code(), Some(0));
    let text = read(dir.path(), "limit.csv");
    let row = text.lines().nth(1).unwrap();
    let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
    let want = 1.0 - (-1.0f64).exp();
    assert!((cols[2] - want).abs() < 1e-7 && (cols[3] - want).abs() < 1e-7, "{row}");
}

#[test]
fn exit_statuses() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_config(dir.path(), "scenario = split\nkappa = 2\n", &[]).status.code(), Some(2));
    assert_eq!(run_config(dir.path(), "scenario = split\nn = -3\n", &[]).status.code(), Some(2));
    assert_eq!(run_config(dir.path(), "not a config line\n", &[]).status.code(), Some(2));
    assert_eq!(gslab(&["--scenario", "nothing"]).status.code(), Some(2));
    assert_eq!(gslab(&["--config", "/nonexistent/gslab.cfg"]).status.code(), Some(2));
    let o = run_config(dir.path(), "scenario = onset\nlambda_min = 0.5\nlambda_max = 50\nlambda_points = 5\n", &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nearest integer"));
}

#[test]
fn flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(dir.path(), "scenario = limit\nfunctions = 3\nseed = 1\n", &["--scenario", "witness"]);
    assert_eq!(o.status.code(), Some(2), "limit keys are unknown to witness");
    let o = run_config(dir.path(), "scenario = split\nn = 4\n", &[]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read(dir.path(), "split.csv").lines().count(), 1 + 5);
}

#[test]
fn seed_drives_the_random_test_set() {
    let dir = tempfile::tempdir().unwrap();
    let config = "scenario = limit\nfunctions = 4\nnu = 1\nmu = 1\n";
    let run = |seed: &str| {
        assert_eq!(run_config(dir.path(), config, &["--seed", seed]).status.code(), Some(0));
        read(dir.path(), "limit-convergence.csv")
    };
    let (a, b, c) = (run("5"), run("5"), run("6"));
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn emitted_wavefunctions_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (trap, resolution) in [("harmonic", "2048"), ("harmonic-grid", "256"), ("cubic", "512")] {
        let config = format!("scenario = ground-state\ntrap = {trap}\nresolution = {resolution}\nsamples = 513\n");
        let o = run_config(dir.path(), &config, &[]);
        assert_eq!(o.status.code(), Some(0), "{trap}: {}", String::from_utf8_lossy(&o.stderr));
        let text = read(dir.path(), "ground-state.csv");
        let back: SampledWaveFunction<f64> = read_wavefunction(&text).unwrap();
        assert_eq!(write_wavefunction(&back).unwrap(), text);
        if trap == "harmonic-grid" {
            let pot = TrapPotential::sampled(|x: f64| x * x, 8.0, 513).unwrap();
            let g = solve_ground_state(&pot, 256).unwrap();
            let direct = ground_state_samples(&g, 8.0, 401).unwrap();
            assert_eq!(back.region(), direct.region());
            for (a, b) in back.values().iter().zip(direct.values()) {
                assert!((a - b).norm() <= 1e-15);
            }
        }
    }
}
