use std::fs;
use std::path::Path;
use std::process::Command as Process;

use qsmc::runner::{self, Command, Options, RunConfig};

fn cfg(src: &str) -> RunConfig {
    RunConfig::from_json(src).unwrap()
}

fn run_in(cmd: Command, c: &RunConfig, dir: &Path) -> runner::Outcome {
    let opts = Options {
        out: Some(dir.to_path_buf()),
        ..Options::default()
    };
    runner::run(cmd, c, &opts).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

const OU: &str = r#"{"model": {"key": "ou-example", "nu": 2, "tau2": 4, "mu": -1, "sigma2": 2}}"#;

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(Command::Check, &cfg(OU), dir.path());
    assert_eq!(out.exit, 0, "{:?}", out.lines);
    assert!(dir.path().join("assumptions.json").exists());

    let light = r#"{"model": {"key": "ou-example", "nu": 2, "tau2": 1, "mu": -1, "sigma2": 2}}"#;
    let out = run_in(Command::Check, &cfg(light), dir.path());
    assert_eq!(out.exit, 2);
    assert!(out.lines.iter().any(|l| l.contains("unbounded below")), "{:?}", out.lines);

    let out = run_in(Command::Check, &RunConfig::preset("cauchy-bm").unwrap(), dir.path());
    assert_eq!(out.exit, 0);
    assert!(out.lines.iter().any(|l| l.contains("spectral-gap sufficient condition fails")));
}

#[test]
fn kappa_tables() {
    let dir = tempfile::tempdir().unwrap();
    let g = cfg(r#"{"model": {"key": "gaussian", "mean": [0], "var": [2]}, "kappa": {"lo": -4, "hi": 4, "n": 81}}"#);
    run_in(Command::Kappa, &g, dir.path());
    for r in csv_rows(&dir.path().join("kappa.csv")) {
        assert!((r[2] - r[0] * r[0] / 8.0).abs() < 1e-12, "{r:?}");
    }

    let o = RunConfig::preset("figure1").unwrap();
    run_in(Command::Kappa, &o, dir.path());
    let rows = csv_rows(&dir.path().join("kappa.csv"));
    let at = rows.iter().find(|r| (r[0] + 2.5).abs() < 1e-12).unwrap();
    assert!(at[2].abs() < 1e-12);

    run_in(Command::Kappa, &RunConfig::preset("cauchy-bm").unwrap(), dir.path());
    let rows = csv_rows(&dir.path().join("kappa.csv"));
    let at = rows.iter().find(|r| r[0].abs() < 1e-12).unwrap();
    assert!(at[2].abs() < 1e-12);
}

fn small_ou_sim(replicas: usize) -> RunConfig {
    let mut c = RunConfig::preset("figure1").unwrap();
    c.ensemble.replicas = replicas;
    c.ensemble.horizon = 5.0;
    c.ensemble.checkpoints = vec![1.0, 5.0];
    c.ensemble.fit_window = Some([2.0, 5.0]);
    c
}

#[test]
fn simulate_writes_the_artifacts_deterministically() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let c = small_ou_sim(20_000);
    let out = run_in(Command::Simulate, &c, a.path());
    assert_eq!(out.exit, 0);
    let opts = Options {
        out: Some(b.path().to_path_buf()),
        workers: Some(3),
        ..Options::default()
    };
    runner::run(Command::Simulate, &c, &opts).unwrap();
    for name in ["survival.csv", "law_t1.csv", "law_t5.csv", "moments.csv", "report.json"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert!(x == y, "{name} differs between runs");
    }
    let header = fs::read_to_string(a.path().join("moments.csv")).unwrap();
    assert!(header.starts_with("t,n_survivors,mean,var,se_mean,se_var\n"));
    let law = csv_rows(&a.path().join("law_t5.csv"));
    let survivors: f64 = law.iter().map(|r| r[2]).sum();
    let report: serde_json::Value = serde_json::from_slice(&fs::read(a.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["checkpoints"][1]["n_survivors"].as_f64().unwrap(), survivors);

    let reseeded = Options {
        out: Some(b.path().to_path_buf()),
        seed: Some(99),
        ..Options::default()
    };
    runner::run(Command::Simulate, &c, &reseeded).unwrap();
    assert_ne!(
        fs::read(a.path().join("survival.csv")).unwrap(),
        fs::read(b.path().join("survival.csv")).unwrap()
    );
}

#[test]
fn unkilled_preset_keeps_everyone() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = RunConfig::preset("langevin-stationary").unwrap();
    c.ensemble.replicas = 2000;
    let out = run_in(Command::Simulate, &c, dir.path());
    assert_eq!(out.exit, 0);
    for r in csv_rows(&dir.path().join("survival.csv")) {
        assert_eq!(r[1], 1.0);
    }
    let report = fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(report.contains("no killing; Langevin stationary case"));
}

#[test]
fn extinction_before_first_checkpoint_is_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg(r#"{"model": {"key": "gaussian", "mean": [0], "var": [0.05]},
                   "ensemble": {"replicas": 200, "horizon": 2, "checkpoints": [2], "x0": [6]}}"#);
    let out = run_in(Command::Simulate, &c, dir.path());
    assert_eq!(out.exit, 3);
    assert!(out.lines.last().unwrap().contains("raise the replica count"));
    assert_eq!(runner::exit_code(&qsmc::Error::Extinction { t: 1.0, replicas: 1 }), 3);
}

#[test]
fn target_sampler_needs_a_gaussian_target() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = RunConfig::preset("cauchy-bm").unwrap();
    c.ensemble.x0 = None;
    c.ensemble.initial = Some(runner::InitialSpec::Target);
    let err = runner::run(
        Command::Simulate,
        &c,
        &Options {
            out: Some(dir.path().to_path_buf()),
            ..Options::default()
        },
    )
    .unwrap_err();
    assert_eq!(runner::exit_code(&err), 1);
}

#[test]
fn spectrum_overlays() {
    let dir = tempfile::tempdir().unwrap();
    run_in(Command::Spectrum, &RunConfig::preset("figure1").unwrap(), dir.path());
    let rows = csv_rows(&dir.path().join("spectrum.csv"));
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert!(r[3] / r[2] < 0.01, "{r:?}");
    }
    let header = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(header.starts_with("index,numeric_eigenvalue,analytic_eigenvalue_if_known,abs_error\n"));

    let g = cfg(r#"{"model": {"key": "gaussian", "mean": [0], "var": [2]}, "spectral": {"lo": -15, "hi": 15, "n": 1500, "k": 3}}"#);
    run_in(Command::Spectrum, &g, dir.path());
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("spectrum.json")).unwrap()).unwrap();
    assert!((report["gap"].as_f64().unwrap() - 0.5).abs() < 1e-3);
    let base: Vec<f64> = report["eigenvalues"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();

    let mut shifted = g.clone();
    shifted.killing.k_override = Some(0.25 + 0.75);
    run_in(Command::Spectrum, &shifted, dir.path());
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("spectrum.json")).unwrap()).unwrap();
    for (a, b) in base.iter().zip(report["eigenvalues"].as_array().unwrap()) {
        assert!((b.as_f64().unwrap() - a - 0.75).abs() < 1e-9);
    }
}

#[test]
fn spectrum_rejects_higher_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg(r#"{"model": {"key": "gaussian", "mean": [0, 0], "var": [1, 1]}, "killing": {"search_box": [-8, 8]}}"#);
    let err = runner::run(
        Command::Spectrum,
        &c,
        &Options {
            out: Some(dir.path().to_path_buf()),
            ..Options::default()
        },
    )
    .unwrap_err();
    assert_eq!(runner::exit_code(&err), 1);
}

#[test]
fn langevin_matches_the_q_process() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = RunConfig::preset("figure1").unwrap();
    c.langevin.replicas = 200;
    c.langevin.horizon = 100.0;
    run_in(Command::Langevin, &c, dir.path());
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("langevin.json")).unwrap()).unwrap();
    let mean = report["moments"]["mean"][0].as_f64().unwrap();
    let var = report["moments"]["var"][0].as_f64().unwrap();
    assert!((mean + 2.0).abs() < 0.1, "{mean}");
    assert!((var - 4.0 / 3.0).abs() < 0.15, "{var}");
    assert_eq!(report["oracle_mean"][0].as_f64().unwrap(), -2.0);
}

fn qsmc() -> Process {
    Process::new(env!("CARGO_BIN_EXE_qsmc"))
}

#[test]
fn binary_exit_codes_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let ok = qsmc()
        .args(["kappa", "--preset", "figure1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("K = 0.265625"));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\n  \"model\": {\"key\": \"cauchy\"},\n  \"scheme\": {\"dt\": -1}\n}\n").unwrap();
    let out = qsmc().args(["simulate", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("scheme.dt"));

    fs::write(&bad, "{\n  \"model\": {\"key\": \"cauchy\"},\n  \"colour\": 1\n}\n").unwrap();
    let out = qsmc().args(["check", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("colour") && err.contains("line 3"), "{err}");

    let light = dir.path().join("light.json");
    fs::write(
        &light,
        r#"{"model": {"key": "ou-example", "nu": 2, "tau2": 1, "mu": -1, "sigma2": 2}}"#,
    )
    .unwrap();
    let out = qsmc()
        .args(["check", "--config"])
        .arg(&light)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = qsmc().args(["check", "--preset", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_is_idempotent_through_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("small.json");
    let mut c = small_ou_sim(5000);
    c.ensemble.export_paths = 2;
    fs::write(&cfg_path, c.to_json()).unwrap();
    let go = |workers: &str| {
        let out = qsmc()
            .args(["simulate", "--config"])
            .arg(&cfg_path)
            .arg("--out")
            .arg(dir.path().join("run"))
            .args(["--workers", workers, "--seed", "5"])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        (
            fs::read(dir.path().join("run/survival.csv")).unwrap(),
            fs::read(dir.path().join("run/paths/path_1.csv")).unwrap(),
        )
    };
    assert_eq!(go("1"), go("2"));
    let path = fs::read_to_string(dir.path().join("run/paths/path_0.csv")).unwrap();
    assert!(path.starts_with("time,x_1\n0.0000000000000000e0,3.0000000000000000e0\n"));
}
