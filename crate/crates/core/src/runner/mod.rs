//! The config-driven experiment runner behind the `qsmc` binary.
//!
//! Every command takes a validated [`RunConfig`], writes its artifacts into
//! the output directory and returns an [`Outcome`] carrying the exit code and
//! a short human-readable summary. Nothing in the artifacts depends on the
//! wall clock or on the number of worker threads.

pub mod config;

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

pub use config::{BoxSpec, InitialSpec, ModelConfig, RunConfig, PRESETS};

use crate::catalog::{Known, Model};
use crate::dynamics::{langevin_drift, long_run_moments};
use crate::ensemble::{fit_exp_rate, ks_statistic, normal_cdf, run_ensemble, summarize, EnsembleConfig, InitialState};
use crate::error::{Error, Result};
use crate::killing::simulate_killed;
use crate::model::{build_killing, check_assumptions, KillingSpec};
use crate::output::{self, write_file};
use crate::rng::RngStream;
use crate::spectral::{
    discretize_generator, discretize_langevin, eigenfunction_residual, ou_qprocess, ou_spectrum, GridSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Kappa,
    Simulate,
    Spectrum,
    Langevin,
}

/// Command-line overrides applied on top of the config.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// 0 success, 2 assumption flag, 3 statistical failure.
    pub exit: u8,
    pub lines: Vec<String>,
}

impl Outcome {
    fn ok(lines: Vec<String>) -> Self {
        Self { exit: 0, lines }
    }
}

/// Exit code for a failed command: 1 config, 2 assumption, 3 statistical.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Parameter(_) | Error::Io(_) | Error::Inapplicable(_) | Error::Evaluation { .. } => 1,
        Error::UnboundedBelow { .. } | Error::NegativeRate { .. } => 2,
        Error::Extinction { .. }
        | Error::EmptySample
        | Error::TooFewSamples { .. }
        | Error::Window { .. }
        | Error::Numeric(_)
        | Error::Tolerance { .. } => 3,
    }
}

/// Applies `opts` and runs `cmd`, inside a pool of `opts.workers` threads when given.
pub fn run(cmd: Command, cfg: &RunConfig, opts: &Options) -> Result<Outcome> {
    let mut cfg = cfg.clone();
    if let Some(seed) = opts.seed {
        cfg.ensemble.seed = seed;
    }
    if let Some(out) = &opts.out {
        cfg.output = out.to_string_lossy().into_owned();
    }
    cfg.validate()?;
    let out = PathBuf::from(&cfg.output);
    let go = || match cmd {
        Command::Check => cmd_check(&cfg, &out),
        Command::Kappa => cmd_kappa(&cfg, &out),
        Command::Simulate => cmd_simulate(&cfg, &out),
        Command::Spectrum => cmd_spectrum(&cfg, &out),
        Command::Langevin => cmd_langevin(&cfg, &out),
    };
    match opts.workers {
        Some(0) => Err(Error::Config("--workers must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))?
            .install(go),
        None => go(),
    }
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    let mut body = serde_json::to_string_pretty(value).map_err(|e| Error::Numeric(e.to_string()))?;
    body.push('\n');
    write_file(dir, name, &body)
}

fn killing_for(cfg: &RunConfig, model: &Model) -> Result<KillingSpec> {
    build_killing(
        &model.target,
        &model.drift,
        cfg.killing.k_override,
        &cfg.search_box()?,
        cfg.killing.tol,
    )
}

fn require_1d(model: &Model, what: &str) -> Result<()> {
    if model.dim() != 1 {
        return Err(Error::Inapplicable(format!("{what} needs a 1-d model, got d = {}", model.dim())));
    }
    Ok(())
}

/// Numerical assumption checks; writes `assumptions.json`. Exit 2 on any violation.
pub fn cmd_check(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let model = cfg.build_model()?;
    let report = check_assumptions(&model.target, &model.drift, &cfg.quad_box()?, cfg.check.quad_tol)?;
    write_json(
        out,
        "assumptions.json",
        &json!({ "model": model.name, "passed": report.passed(), "report": report }),
    )?;
    let mut lines = vec![format!(
        "{}: ∫π²/γ = {:.6e}, inf κ̃ = {:.6e}, shell min κ̃ = {:.6e}",
        model.name, report.l2_integral, report.kappa_lower_bound, report.liminf_estimate
    )];
    lines.extend(report.violations.iter().map(|v| format!("violation: {v}")));
    lines.extend(report.warnings.iter().map(|w| format!("warning: {w}")));
    Ok(Outcome {
        exit: if report.passed() { 0 } else { 2 },
        lines,
    })
}

/// `κ̃` and `κ` on a 1-d grid; writes `kappa.csv` and `kappa.json`.
pub fn cmd_kappa(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let model = cfg.build_model()?;
    require_1d(&model, "kappa")?;
    let killing = killing_for(cfg, &model)?;
    let g = &cfg.kappa;
    let rows: Vec<(f64, f64, f64)> = (0..g.n)
        .map(|i| {
            let y = g.lo + (g.hi - g.lo) * i as f64 / (g.n - 1) as f64;
            (y, killing.kappa_tilde(&[y]), killing.kappa(&[y]))
        })
        .collect();
    write_file(out, "kappa.csv", &output::kappa_csv(&rows))?;
    write_json(
        out,
        "kappa.json",
        &json!({
            "model": model.name,
            "shift_k": killing.shift_k(),
            "minimizer": killing.minimizer(),
            "warnings": killing.warnings(),
        }),
    )?;
    let mut lines = vec![format!("{}: K = {:.12}", model.name, killing.shift_k())];
    if let Some(y) = killing.minimizer() {
        lines.push(format!("minimizer y* = {y:?}"));
    }
    lines.extend(killing.warnings().iter().map(|w| format!("warning: {w}")));
    Ok(Outcome::ok(lines))
}

/// Turns the ensemble section into an [`EnsembleConfig`].
pub fn ensemble_config(cfg: &RunConfig, model: &Model) -> Result<EnsembleConfig> {
    let e = &cfg.ensemble;
    let initial = match (&e.x0, &e.initial) {
        (Some(x), None) | (None, Some(InitialSpec::Point(x))) => InitialState::Point(x.clone()),
        (None, Some(InitialSpec::Normal { mean, var })) => InitialState::Normal {
            mean: mean.clone(),
            var: var.clone(),
        },
        (None, Some(InitialSpec::Target)) => {
            let (mean, var) = model.target_moments().ok_or_else(|| {
                Error::Config(format!("ensemble.initial: no sampler for the `{}` target", model.name))
            })?;
            InitialState::Normal { mean, var }
        }
        (None, None) => return Err(Error::Config("ensemble: need x0 or initial".into())),
        (Some(_), Some(_)) => return Err(Error::Config("ensemble: give either x0 or initial, not both".into())),
    };
    let checkpoints = if e.checkpoints.is_empty() {
        vec![e.horizon]
    } else {
        e.checkpoints.clone()
    };
    Ok(EnsembleConfig {
        replicas: e.replicas,
        horizon: e.horizon,
        checkpoints,
        scheme: cfg.scheme,
        seed: e.seed,
        initial,
        binning: e.binning,
    })
}

#[derive(Serialize)]
struct CheckpointReport {
    t: f64,
    n_survivors: usize,
    survival: f64,
    mean: Option<Vec<f64>>,
    var: Option<Vec<f64>>,
    se_mean: Option<Vec<f64>>,
    se_var: Option<Vec<f64>>,
    /// One-sample KS distance to the quasi-limiting law, when it is Gaussian.
    ks_vs_target: Option<Vec<f64>>,
}

/// Killed ensemble; writes `survival.csv`, `law_t*.csv`, `moments.csv` and `report.json`.
/// Exit 3 when nobody survives to the first checkpoint.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let model = cfg.build_model()?;
    let killing = killing_for(cfg, &model)?;
    let ecfg = ensemble_config(cfg, &model)?;
    let result = run_ensemble(&model.drift, &killing, &ecfg).map_err(|e| match e {
        Error::Parameter(m) => Error::Config(m),
        other => other,
    })?;
    let d = model.dim();

    write_file(out, "survival.csv", &output::survival_csv(&result.survival))?;
    for law in &result.laws {
        if law.is_empty() {
            continue;
        }
        for k in 0..d {
            write_file(out, &output::law_file_name(law.t, k, d), &output::law_csv(law, k))?;
        }
    }
    write_file(out, "moments.csv", &output::moments_csv(&result.laws, d))?;

    for i in 0..cfg.ensemble.export_paths.min(ecfg.replicas) {
        let rng = RngStream::new(ecfg.seed, i as u64);
        let mut x0 = vec![0.0; d];
        ecfg.initial.draw(rng, &mut x0);
        let traj = simulate_killed(&model.drift, &killing, &x0, ecfg.horizon, &ecfg.scheme, rng)?;
        write_file(
            &out.join("paths"),
            &format!("path_{i}.csv"),
            &output::path_csv(&traj.path.times, &traj.path.states),
        )?;
    }

    let target = model.target_moments();
    let checkpoints: Vec<CheckpointReport> = result
        .laws
        .iter()
        .map(|law| {
            let m = summarize(law).ok();
            let pick = |f: fn(&crate::ensemble::Moments) -> f64| m.as_ref().map(|v| v.iter().map(f).collect());
            let ks_vs_target = match (&target, law.is_empty()) {
                (Some((mean, var)), false) => Some(
                    (0..d)
                        .map(|k| ks_statistic(&law.coordinate(k), normal_cdf(mean[k], var[k])))
                        .collect::<Result<Vec<_>>>(),
                ),
                _ => None,
            }
            .transpose()
            .ok()
            .flatten();
            CheckpointReport {
                t: law.t,
                n_survivors: law.n_survivors,
                survival: law.n_survivors as f64 / result.replicas as f64,
                mean: pick(|m| m.mean),
                var: pick(|m| m.var),
                se_mean: pick(|m| m.se_mean),
                se_var: pick(|m| m.se_var),
                ks_vs_target,
            }
        })
        .collect();

    let window = cfg
        .ensemble
        .fit_window
        .map(|[a, b]| (a, b))
        .unwrap_or((0.5 * ecfg.horizon, ecfg.horizon));
    let fit = fit_exp_rate(&result.survival.times, &result.survival.survival, window);
    let mut lines = Vec::new();
    let mut warnings: Vec<String> = killing.warnings().to_vec();
    let fit_json = match &fit {
        Ok(f) => {
            lines.push(format!(
                "survival rate on [{}, {}]: {:.6} (K = {:.6})",
                window.0,
                window.1,
                -f.slope,
                killing.shift_k()
            ));
            json!(f)
        }
        Err(e) => {
            warnings.push(format!("survival fit: {e}"));
            serde_json::Value::Null
        }
    };
    for c in &checkpoints {
        match (&c.mean, &c.var) {
            (Some(m), Some(v)) => lines.push(format!(
                "t = {}: {} survivors, mean {:?}, var {:?}",
                c.t, c.n_survivors, m, v
            )),
            _ => {
                let w = format!("t = {}: {} survivors, law not estimated", c.t, c.n_survivors);
                lines.push(w.clone());
                warnings.push(w);
            }
        }
    }
    write_json(
        out,
        "report.json",
        &json!({
            "model": model.name,
            "shift_k": killing.shift_k(),
            "replicas": result.replicas,
            "seed": ecfg.seed,
            "dt": ecfg.scheme.dt,
            "scheme": ecfg.scheme.scheme,
            "checkpoints": checkpoints,
            "survival_fit": fit_json,
            "warnings": warnings,
        }),
    )?;
    lines.extend(killing.warnings().iter().map(|w| format!("warning: {w}")));

    if result.laws.first().is_some_and(|l| l.is_empty()) {
        let err = Error::Extinction {
            t: result.laws[0].t,
            replicas: result.replicas,
        };
        lines.push(err.to_string());
        return Ok(Outcome { exit: 3, lines });
    }
    Ok(Outcome::ok(lines))
}

/// Closed-form eigenvalues of the unshifted killed generator, when known.
fn analytic_spectrum(model: &Model, k: usize) -> Option<Vec<f64>> {
    let n = k.checked_sub(1)?;
    match &model.known {
        Known::Ou(p) => ou_spectrum(p, n).ok().map(|(v, _)| v),
        Known::GaussianBm { var, .. } if var.len() == 1 => Some((0..k).map(|i| i as f64 / var[0]).collect()),
        Known::GaussianMatched { var, .. } if var.len() == 1 => {
            Some((0..k).map(|i| i as f64 / (2.0 * var[0])).collect())
        }
        _ => None,
    }
}

/// Low eigenvalues of the discretized killed generator, with the analytic
/// overlay when known; writes `spectrum.csv` and `spectrum.json`.
pub fn cmd_spectrum(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let model = cfg.build_model()?;
    require_1d(&model, "spectrum")?;
    let killing = killing_for(cfg, &model)?;
    let s = &cfg.spectral;
    let grid = GridSpec::new(s.lo, s.hi, s.n)?;
    let m = discretize_generator(&model.target, &model.drift, &killing, grid)?;
    let numeric = m.low_eigenvalues(s.k)?;
    let shift = killing.shift_k();
    let analytic: Option<Vec<f64>> = analytic_spectrum(&model, s.k).map(|v| v.iter().map(|l| l + shift).collect());
    write_file(out, "spectrum.csv", &output::spectrum_csv(&numeric, analytic.as_deref()))?;

    let max_rel_error = analytic.as_ref().map(|a| {
        numeric
            .iter()
            .zip(a)
            .map(|(x, y)| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    });
    let langevin = discretize_langevin(&model.target, &model.drift, grid)?.low_eigenvalues(s.k)?;
    let translated: Vec<f64> = numeric.iter().map(|v| v - shift).collect();
    let max_translation_gap = translated
        .iter()
        .zip(&langevin)
        .skip(1)
        .map(|(x, y)| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    let residual = eigenfunction_residual(&model.target, &model.drift, &killing, shift, grid).ok();
    let gap = (numeric.len() > 1).then(|| numeric[1] - numeric[0]);
    write_json(
        out,
        "spectrum.json",
        &json!({
            "model": model.name,
            "grid": grid,
            "shift_k": shift,
            "eigenvalues": numeric,
            "analytic": analytic,
            "max_rel_error": max_rel_error,
            "gap": gap,
            "langevin_eigenvalues": langevin,
            "max_rel_translation_gap": max_translation_gap,
            "eigenfunction_residual": residual,
            "warnings": m.warnings,
        }),
    )?;
    let mut lines = vec![format!("{}: eigenvalues {:?}", model.name, numeric)];
    if let Some(g) = gap {
        lines.push(format!("gap {g:.6}"));
    }
    if let Some(e) = max_rel_error {
        lines.push(format!("max relative error vs closed form {e:.3e}"));
    }
    lines.extend(m.warnings.iter().map(|w| format!("warning: {w}")));
    Ok(Outcome::ok(lines))
}

/// Long-run moments of the Langevin diffusion targeting `π²/γ`; writes `langevin.json`.
pub fn cmd_langevin(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let model = cfg.build_model()?;
    let drift = langevin_drift(&model.target, &model.drift)?;
    let l = &cfg.langevin;
    let x0 = match (&l.x0, model.target_moments()) {
        (Some(x), _) => x.clone(),
        (None, Some((mean, _))) => mean,
        (None, None) => vec![0.0; model.dim()],
    };
    let moments = long_run_moments(&drift, &x0, l.horizon, &cfg.scheme, l.replicas, l.burn_in, cfg.ensemble.seed)
        .map_err(|e| match e {
            Error::Parameter(m) => Error::Config(m),
            other => other,
        })?;
    let oracle: Option<(Vec<f64>, Vec<f64>)> = match &model.known {
        Known::Ou(p) => ou_qprocess(p).ok().map(|(m, v)| (vec![m], vec![v])),
        Known::GaussianBm { mean, var } => Some((mean.clone(), var.iter().map(|v| 0.5 * v).collect())),
        Known::GaussianMatched { mean, var } => Some((mean.clone(), var.clone())),
        Known::Nothing => None,
    };
    write_json(
        out,
        "langevin.json",
        &json!({
            "model": model.name,
            "x0": x0,
            "moments": moments,
            "oracle_mean": oracle.as_ref().map(|o| &o.0),
            "oracle_var": oracle.as_ref().map(|o| &o.1),
        }),
    )?;
    let mut lines = vec![format!(
        "{}: mean {:?} (se {:?}), var {:?}",
        model.name, moments.mean, moments.se_mean, moments.var
    )];
    if let Some((m, v)) = oracle {
        lines.push(format!("closed form: mean {m:?}, var {v:?}"));
    }
    Ok(Outcome::ok(lines))
}
