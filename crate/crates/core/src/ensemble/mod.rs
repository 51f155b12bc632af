//! Ensembles of independent killed replicas.
//!
//! Conditioned laws `P_x(X_t ∈ · | τ∂ > t)` are estimated by naive
//! conditioning: replicas killed before `t` are dropped and the survivors are
//! taken as the sample. Replica `i` always uses substream `i` of the seed, and
//! results are merged in replica order, so the output does not depend on how
//! work is spread across threads.

pub mod stats;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{DriftField, SchemeConfig, Stepper, TimeGrid};
use crate::error::{Error, Result};
use crate::killing::{drive_replica, KillingRate};
use crate::rng::RngStream;
pub use stats::{
    fit_exp_rate, histogram, ks_statistic, ks_two_sample, moments, normal_cdf, Binning, Histogram, Moments, RateFit,
};

/// Where replicas start.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum InitialState {
    Point(Vec<f64>),
    /// Independent draws from `N(mean, diag(var))`.
    Normal { mean: Vec<f64>, var: Vec<f64> },
}

impl InitialState {
    pub fn dim(&self) -> usize {
        match self {
            InitialState::Point(x) => x.len(),
            InitialState::Normal { mean, .. } => mean.len(),
        }
    }

    pub(crate) fn draw(&self, rng: RngStream, out: &mut [f64]) {
        match self {
            InitialState::Point(x) => out.copy_from_slice(x),
            InitialState::Normal { mean, var } => {
                let mut r = rng.initial_rng();
                for ((o, m), v) in out.iter_mut().zip(mean).zip(var) {
                    let z: f64 = r.sample(StandardNormal);
                    *o = m + v.sqrt() * z;
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub replicas: usize,
    pub horizon: f64,
    pub checkpoints: Vec<f64>,
    pub scheme: SchemeConfig,
    pub seed: u64,
    pub initial: InitialState,
    pub binning: Binning,
}

impl EnsembleConfig {
    /// Grid and checkpoint indices; every checkpoint must be a grid time.
    pub fn resolve(&self) -> Result<(TimeGrid, Vec<usize>)> {
        if self.replicas == 0 {
            return Err(Error::Config("replicas must be positive".into()));
        }
        let grid = TimeGrid::new(self.scheme.dt, self.horizon)?;
        let mut idx = Vec::with_capacity(self.checkpoints.len());
        for &t in &self.checkpoints {
            if !(t >= 0.0 && t <= self.horizon) {
                return Err(Error::Config(format!("checkpoint {t} outside [0, {}]", self.horizon)));
            }
            let k = grid
                .index_of(t)
                .ok_or_else(|| Error::Config(format!("checkpoint {t} is not a multiple of dt = {}", self.scheme.dt)))?;
            if idx.last().is_some_and(|&p| p >= k) {
                return Err(Error::Config("checkpoints must be strictly increasing".into()));
            }
            idx.push(k);
        }
        if let InitialState::Normal { var, mean } = &self.initial {
            if var.len() != mean.len() || var.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::Config("initial normal needs positive variances per coordinate".into()));
            }
        }
        Ok((grid, idx))
    }
}

/// Survivors at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalLaw {
    pub t: f64,
    pub survivor_states: Vec<Vec<f64>>,
    pub n_survivors: usize,
    /// One histogram per coordinate; empty when nobody survived.
    pub histograms: Vec<Histogram>,
}

impl ConditionalLaw {
    pub fn is_empty(&self) -> bool {
        self.n_survivors == 0
    }

    /// Survivor values of coordinate `k`.
    pub fn coordinate(&self, k: usize) -> Vec<f64> {
        self.survivor_states.iter().map(|x| x[k]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalCurve {
    pub times: Vec<f64>,
    pub survival: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl SurvivalCurve {
    /// `(p̂, stderr)` at grid time `t`.
    pub fn at(&self, t: f64) -> Option<(f64, f64)> {
        let i = self.times.iter().position(|s| (s - t).abs() <= 1e-12 * t.abs().max(1.0))?;
        Some((self.survival[i], self.stderr[i]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub laws: Vec<ConditionalLaw>,
    pub survival: SurvivalCurve,
    /// Killing time of each replica, in replica order (`None`: survived).
    pub kill_times: Vec<Option<f64>>,
    pub replicas: usize,
}

impl EnsembleResult {
    pub fn law_at(&self, t: f64) -> Option<&ConditionalLaw> {
        self.laws.iter().find(|l| (l.t - t).abs() <= 1e-12 * t.abs().max(1.0))
    }
}

const CHUNK: usize = 2048;

struct ChunkOut {
    /// per checkpoint, survivor states in replica order
    survivors: Vec<Vec<Vec<f64>>>,
    /// (death step, τ) per replica
    fates: Vec<Option<(usize, f64)>>,
}

pub fn run_ensemble(drift: &dyn DriftField, kappa: &(impl KillingRate + ?Sized), cfg: &EnsembleConfig) -> Result<EnsembleResult> {
    let streams: Vec<u64> = (0..cfg.replicas as u64).collect();
    run_ensemble_streams(drift, kappa, cfg, &streams)
}

/// As [`run_ensemble`], with replica `i` driven by substream `substreams[i]`.
pub fn run_ensemble_streams(
    drift: &dyn DriftField,
    kappa: &(impl KillingRate + ?Sized),
    cfg: &EnsembleConfig,
    substreams: &[u64],
) -> Result<EnsembleResult> {
    let (grid, cp_idx) = cfg.resolve()?;
    let d = drift.dim();
    if cfg.initial.dim() != d {
        return Err(Error::Config(format!(
            "initial state has dimension {}, model has {d}",
            cfg.initial.dim()
        )));
    }
    Stepper::new(drift, &cfg.scheme)?;
    let n = substreams.len();

    let chunks: Vec<ChunkOut> = substreams
        .par_chunks(CHUNK)
        .map(|chunk| -> Result<ChunkOut> {
            let mut stepper = Stepper::new(drift, &cfg.scheme)?;
            let mut out = ChunkOut {
                survivors: vec![Vec::new(); cp_idx.len()],
                fates: Vec::with_capacity(chunk.len()),
            };
            let mut x = vec![0.0; d];
            for &s in chunk {
                let rng = RngStream::new(cfg.seed, s);
                cfg.initial.draw(rng, &mut x);
                let mut next_cp = 0;
                let fate = drive_replica(
                    &mut stepper,
                    kappa,
                    &mut x,
                    &grid,
                    rng,
                    |k, x, _| {
                        while next_cp < cp_idx.len() && cp_idx[next_cp] < k {
                            next_cp += 1;
                        }
                        if next_cp < cp_idx.len() && cp_idx[next_cp] == k {
                            out.survivors[next_cp].push(x.to_vec());
                            next_cp += 1;
                        }
                    },
                    |_, _, _| {},
                )?;
                out.fates.push(fate.death);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut deaths_at = vec![0usize; grid.steps + 2];
    let mut kill_times = Vec::with_capacity(n);
    let mut survivors: Vec<Vec<Vec<f64>>> = vec![Vec::new(); cp_idx.len()];
    for c in chunks {
        for f in c.fates {
            match f {
                Some((k, tau)) => {
                    deaths_at[k] += 1;
                    kill_times.push(Some(tau));
                }
                None => kill_times.push(None),
            }
        }
        for (all, part) in survivors.iter_mut().zip(c.survivors) {
            all.extend(part);
        }
    }

    let nf = n as f64;
    let mut alive = n;
    let mut survival = Vec::with_capacity(grid.steps + 1);
    let mut stderr = Vec::with_capacity(grid.steps + 1);
    for dead in deaths_at.iter().take(grid.steps + 1) {
        alive -= dead;
        let p = alive as f64 / nf;
        survival.push(p);
        stderr.push((p * (1.0 - p) / nf).sqrt());
    }

    let laws = survivors
        .into_iter()
        .zip(&cp_idx)
        .map(|(states, &k)| {
            let histograms = if states.is_empty() {
                Vec::new()
            } else {
                (0..d)
                    .map(|j| {
                        let col: Vec<f64> = states.iter().map(|x| x[j]).collect();
                        histogram(&col, cfg.binning)
                    })
                    .collect::<Result<_>>()?
            };
            Ok(ConditionalLaw {
                t: grid.time(k),
                n_survivors: states.len(),
                survivor_states: states,
                histograms,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(EnsembleResult {
        laws,
        survival: SurvivalCurve {
            times: grid.times(),
            survival,
            stderr,
        },
        kill_times,
        replicas: n,
    })
}

/// Per-coordinate moments of a checkpoint law.
pub fn summarize(law: &ConditionalLaw) -> Result<Vec<Moments>> {
    if law.n_survivors < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: law.n_survivors,
        });
    }
    let d = law.survivor_states[0].len();
    (0..d).map(|k| moments(&law.coordinate(k))).collect()
}
