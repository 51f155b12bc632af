//! Simulation of `dX = b(X) dt + dW`: Euler–Maruyama for general gradient
//! drifts, exact transitions for Brownian motion and the 1-d OU family, and
//! the Langevin diffusion targeting `π²/γ` (the Q-process).

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{with_scratch, DriftKind, DriftSpec, TargetSpec};
use crate::rng::RngStream;

/// A drift vector field.
pub trait DriftField: Sync {
    fn dim(&self) -> usize;
    fn drift_at(&self, x: &[f64], out: &mut [f64]);
    fn kind(&self) -> DriftKind {
        DriftKind::General
    }
}

impl DriftField for DriftSpec {
    fn dim(&self) -> usize {
        self.potential.dim()
    }
    fn drift_at(&self, x: &[f64], out: &mut [f64]) {
        self.potential.gradient(x, out);
    }
    fn kind(&self) -> DriftKind {
        self.kind
    }
}

/// `b ≡ 0`.
#[derive(Debug, Clone, Copy)]
pub struct ZeroDrift {
    pub dim: usize,
}

impl DriftField for ZeroDrift {
    fn dim(&self) -> usize {
        self.dim
    }
    fn drift_at(&self, _: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
    fn kind(&self) -> DriftKind {
        DriftKind::Zero
    }
}

/// `b = ½∇log(π²/γ) = ∇U − ∇A`.
#[derive(Debug, Clone)]
pub struct LangevinDrift {
    target: TargetSpec,
    drift: DriftSpec,
}

impl DriftField for LangevinDrift {
    fn dim(&self) -> usize {
        self.target.dim()
    }
    fn drift_at(&self, x: &[f64], out: &mut [f64]) {
        self.target.log_density.gradient(x, out);
        with_scratch(x.len(), |ga, _| {
            self.drift.potential.gradient(x, ga);
            for (o, a) in out.iter_mut().zip(ga.iter()) {
                *o -= a;
            }
        });
    }
}

pub fn langevin_drift(target: &TargetSpec, drift: &DriftSpec) -> Result<LangevinDrift> {
    if target.dim() != drift.dim() {
        return Err(Error::Parameter("target and drift dimensions differ".into()));
    }
    Ok(LangevinDrift {
        target: target.clone(),
        drift: drift.clone(),
    })
}

/// `x + b(x) dt + √dt · noise`.
pub fn euler_step(drift: &dyn DriftField, x: &[f64], dt: f64, noise: &[f64]) -> Result<Vec<f64>> {
    if !(dt > 0.0) {
        return Err(Error::Parameter(format!("dt must be positive, got {dt}")));
    }
    let mut out = x.to_vec();
    let mut b = vec![0.0; x.len()];
    euler_in_place(drift, &mut out, dt, dt.sqrt(), noise, &mut b)?;
    Ok(out)
}

#[inline]
fn euler_in_place(
    drift: &dyn DriftField,
    x: &mut [f64],
    dt: f64,
    sqrt_dt: f64,
    noise: &[f64],
    scratch: &mut [f64],
) -> Result<()> {
    drift.drift_at(x, scratch);
    if scratch.iter().any(|b| !b.is_finite()) {
        return Err(Error::eval("drift", x));
    }
    for ((xi, bi), zi) in x.iter_mut().zip(scratch.iter()).zip(noise) {
        *xi += bi * dt + sqrt_dt * zi;
    }
    Ok(())
}

/// Exact OU transition for `dX = (ν − X)/(2τ²) dt + dW` over time `dt`.
pub fn ou_exact_step(nu: f64, tau2: f64, x: f64, dt: f64, noise: f64) -> Result<f64> {
    if !(tau2 > 0.0) {
        return Err(Error::Parameter(format!("tau2 must be positive, got {tau2}")));
    }
    if !(dt >= 0.0) {
        return Err(Error::Parameter(format!("dt must be nonnegative, got {dt}")));
    }
    let (decay, sd) = ou_coefficients(tau2, dt);
    Ok(nu + (x - nu) * decay + sd * noise)
}

#[inline]
fn ou_coefficients(tau2: f64, dt: f64) -> (f64, f64) {
    let decay = (-dt / (2.0 * tau2)).exp();
    // 1 − e^{−dt/τ²} without cancellation for small dt
    let sd = (tau2 * -(-dt / tau2).exp_m1()).sqrt();
    (decay, sd)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Euler,
    ExactOu,
    ExactBm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeConfig {
    pub dt: f64,
    pub scheme: Scheme,
}

impl SchemeConfig {
    pub fn euler(dt: f64) -> Self {
        Self {
            dt,
            scheme: Scheme::Euler,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Parameter(format!("dt must be positive, got {}", self.dt)));
        }
        Ok(())
    }
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self::euler(0.01)
    }
}

/// A uniform time grid `0, dt, 2dt, …, horizon`, the last step truncated to
/// land exactly on the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub horizon: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Parameter(format!("horizon must be positive, got {horizon}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Parameter(format!("dt must be positive, got {dt}")));
        }
        let ratio = horizon / dt;
        let steps = (ratio - 1e-9 * ratio.max(1.0)).ceil().max(1.0) as usize;
        Ok(Self { dt, horizon, steps })
    }

    pub fn time(&self, k: usize) -> f64 {
        if k >= self.steps {
            self.horizon
        } else {
            k as f64 * self.dt
        }
    }

    /// Length of step `k → k+1`.
    pub fn step_len(&self, k: usize) -> f64 {
        self.time(k + 1) - self.time(k)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.time(k)).collect()
    }

    /// Grid index of `t`, if `t` is a grid time to within 1e-12 (relative above 1).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let k = (t / self.dt).round();
        if k < 0.0 || k as usize > self.steps {
            return None;
        }
        let k = k as usize;
        ((self.time(k) - t).abs() <= 1e-12 * t.abs().max(1.0)).then_some(k)
    }
}

/// Advances states one grid step under the configured scheme.
pub struct Stepper<'a> {
    drift: &'a dyn DriftField,
    scheme: Scheme,
    ou: Option<(f64, f64)>,
    noise: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(drift: &'a dyn DriftField, cfg: &SchemeConfig) -> Result<Self> {
        cfg.validate()?;
        let d = drift.dim();
        let ou = match (cfg.scheme, drift.kind()) {
            (Scheme::ExactOu, DriftKind::Ou { nu, tau2 }) if d == 1 => Some((nu, tau2)),
            (Scheme::ExactOu, _) => {
                return Err(Error::Config("exact_ou scheme needs a 1-d OU drift".into()));
            }
            (Scheme::ExactBm, DriftKind::Zero) => None,
            (Scheme::ExactBm, _) => {
                return Err(Error::Config("exact_bm scheme needs a zero drift".into()));
            }
            (Scheme::Euler, _) => None,
        };
        Ok(Self {
            drift,
            scheme: cfg.scheme,
            ou,
            noise: vec![0.0; d],
            scratch: vec![0.0; d],
        })
    }

    pub fn dim(&self) -> usize {
        self.noise.len()
    }

    /// One step of length `h`; draws one standard normal per coordinate.
    #[inline]
    pub fn step<R: Rng + ?Sized>(&mut self, x: &mut [f64], h: f64, rng: &mut R) -> Result<()> {
        for z in self.noise.iter_mut() {
            *z = rng.sample(StandardNormal);
        }
        match self.scheme {
            Scheme::Euler => euler_in_place(self.drift, x, h, h.sqrt(), &self.noise, &mut self.scratch),
            Scheme::ExactBm => {
                let s = h.sqrt();
                x.iter_mut().zip(&self.noise).for_each(|(xi, z)| *xi += s * z);
                Ok(())
            }
            Scheme::ExactOu => {
                let (nu, tau2) = self.ou.expect("validated in Stepper::new");
                let (decay, sd) = ou_coefficients(tau2, h);
                x[0] = nu + (x[0] - nu) * decay + sd * self.noise[0];
                Ok(())
            }
        }
    }
}

/// A discretized path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGrid {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl PathGrid {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn terminal(&self) -> &[f64] {
        self.states.last().expect("paths hold at least the initial state")
    }
}

pub fn simulate_path(
    drift: &dyn DriftField,
    x0: &[f64],
    horizon: f64,
    cfg: &SchemeConfig,
    rng: RngStream,
) -> Result<PathGrid> {
    if x0.len() != drift.dim() {
        return Err(Error::Parameter(format!(
            "x0 has dimension {}, drift has {}",
            x0.len(),
            drift.dim()
        )));
    }
    let grid = TimeGrid::new(cfg.dt, horizon)?;
    let mut stepper = Stepper::new(drift, cfg)?;
    let mut r = rng.path_rng();
    let mut x = x0.to_vec();
    let mut states = Vec::with_capacity(grid.steps + 1);
    states.push(x.clone());
    for k in 0..grid.steps {
        stepper.step(&mut x, grid.step_len(k), &mut r)?;
        states.push(x.clone());
    }
    Ok(PathGrid {
        times: grid.times(),
        states,
    })
}

/// Pooled post-burn-in moments of many independent long runs.
#[derive(Debug, Clone, Serialize)]
pub struct LongRunMoments {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    /// Standard error of `mean` from the spread of per-replica time averages.
    pub se_mean: Vec<f64>,
    pub replicas: usize,
    pub samples_per_replica: usize,
}

/// Runs `replicas` paths to `horizon` and pools every grid state after
/// `burn_in_fraction · horizon`.
pub fn long_run_moments(
    drift: &dyn DriftField,
    x0: &[f64],
    horizon: f64,
    cfg: &SchemeConfig,
    replicas: usize,
    burn_in_fraction: f64,
    seed: u64,
) -> Result<LongRunMoments> {
    if replicas < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: replicas,
        });
    }
    if !(0.0..1.0).contains(&burn_in_fraction) {
        return Err(Error::Parameter(format!("burn-in fraction {burn_in_fraction} outside [0, 1)")));
    }
    let grid = TimeGrid::new(cfg.dt, horizon)?;
    let first = ((burn_in_fraction * grid.steps as f64).ceil() as usize).max(1);
    let d = drift.dim();
    // per replica: (sum, sum of squares about x0 shift) per coordinate
    let per_replica: Vec<(Vec<f64>, Vec<f64>)> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let mut stepper = Stepper::new(drift, cfg)?;
            let mut r = RngStream::new(seed, i).path_rng();
            let mut x = x0.to_vec();
            let mut s1 = vec![0.0; d];
            let mut s2 = vec![0.0; d];
            for k in 0..grid.steps {
                stepper.step(&mut x, grid.step_len(k), &mut r)?;
                if k + 1 >= first {
                    for j in 0..d {
                        s1[j] += x[j];
                        s2[j] += x[j] * x[j];
                    }
                }
            }
            Ok((s1, s2))
        })
        .collect::<Result<_>>()?;
    let m = (grid.steps + 1 - first) as f64;
    let n = replicas as f64;
    let mut mean = vec![0.0; d];
    let mut var = vec![0.0; d];
    let mut se_mean = vec![0.0; d];
    for j in 0..d {
        let rep_means: Vec<f64> = per_replica.iter().map(|(s1, _)| s1[j] / m).collect();
        let mu = rep_means.iter().sum::<f64>() / n;
        let second = per_replica.iter().map(|(_, s2)| s2[j]).sum::<f64>() / (n * m);
        mean[j] = mu;
        var[j] = (second - mu * mu) * (n * m) / (n * m - 1.0);
        let spread = rep_means.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (n - 1.0);
        se_mean[j] = (spread / n).sqrt();
    }
    Ok(LongRunMoments {
        mean,
        var,
        se_mean,
        replicas,
        samples_per_replica: m as usize,
    })
}
