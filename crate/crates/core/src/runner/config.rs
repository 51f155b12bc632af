//! The JSON run configuration.

use serde::{Deserialize, Serialize};

use crate::catalog::{FieldExprs, Model, OuParams};
use crate::dynamics::SchemeConfig;
use crate::ensemble::Binning;
use crate::error::{Error, Result};
use crate::model::SearchBox;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "key", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    Gaussian {
        mean: Vec<f64>,
        var: Vec<f64>,
    },
    GaussianMatched {
        mean: Vec<f64>,
        var: Vec<f64>,
    },
    Cauchy,
    ExpTail {
        beta: f64,
    },
    OuExample {
        nu: f64,
        tau2: f64,
        mu: f64,
        sigma2: f64,
    },
    Custom {
        log_density: FieldExprs,
        potential: FieldExprs,
    },
}

impl ModelConfig {
    pub fn dim(&self) -> usize {
        match self {
            ModelConfig::Gaussian { mean, .. } | ModelConfig::GaussianMatched { mean, .. } => mean.len(),
            ModelConfig::Custom { log_density, .. } => log_density.grad.len(),
            _ => 1,
        }
    }

    /// `check_box` is where custom derivatives are verified.
    pub fn build(&self, check_box: &SearchBox) -> Result<Model> {
        match self {
            ModelConfig::Gaussian { mean, var } => Model::gaussian(mean.clone(), var.clone()),
            ModelConfig::GaussianMatched { mean, var } => Model::gaussian_matched(mean.clone(), var.clone()),
            ModelConfig::Cauchy => Ok(Model::cauchy()),
            ModelConfig::ExpTail { beta } => Model::exp_tail(*beta),
            ModelConfig::OuExample { nu, tau2, mu, sigma2 } => Model::ou_example(OuParams {
                nu: *nu,
                tau2: *tau2,
                mu: *mu,
                sigma2: *sigma2,
            }),
            ModelConfig::Custom { log_density, potential } => Model::custom(log_density, potential, check_box),
        }
    }
}

/// `[lo, hi]` on every axis, or explicit per-axis bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoxSpec {
    Interval([f64; 2]),
    Bounds { lo: Vec<f64>, hi: Vec<f64> },
}

impl BoxSpec {
    pub fn resolve(&self, d: usize, field: &str) -> Result<SearchBox> {
        let b = match self {
            BoxSpec::Interval([lo, hi]) => SearchBox::cube(d, *lo, *hi),
            BoxSpec::Bounds { lo, hi } => {
                if lo.len() != d || hi.len() != d {
                    return Err(Error::Config(format!("{field}: bounds must have {d} entries")));
                }
                SearchBox::new(lo.clone(), hi.clone())
            }
        };
        b.map_err(|e| Error::Config(format!("{field}: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KillingConfig {
    pub k_override: Option<f64>,
    pub search_box: BoxSpec,
    pub tol: f64,
}

impl Default for KillingConfig {
    fn default() -> Self {
        Self {
            k_override: None,
            search_box: BoxSpec::Interval([-50.0, 50.0]),
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// `X_0 ~ π` (Gaussian targets only).
    Target,
    Normal { mean: Vec<f64>, var: Vec<f64> },
    Point(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSection {
    pub replicas: usize,
    pub horizon: f64,
    /// Defaults to the horizon alone.
    pub checkpoints: Vec<f64>,
    pub seed: u64,
    pub x0: Option<Vec<f64>>,
    pub initial: Option<InitialSpec>,
    pub binning: Binning,
    /// Window for the survival-rate fit, defaults to the second half of the run.
    pub fit_window: Option<[f64; 2]>,
    /// Number of individual killed paths to write out.
    pub export_paths: usize,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            replicas: 10_000,
            horizon: 20.0,
            checkpoints: Vec::new(),
            seed: 1,
            x0: None,
            initial: None,
            binning: Binning::FreedmanDiaconis,
            fit_window: None,
            export_paths: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralSection {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    /// Eigenvalues to report.
    pub k: usize,
}

impl Default for SpectralSection {
    fn default() -> Self {
        Self {
            lo: -20.0,
            hi: 20.0,
            n: 2000,
            k: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckSection {
    /// Defaults to the killing search box.
    pub quad_box: Option<BoxSpec>,
    pub quad_tol: f64,
}

impl Default for CheckSection {
    fn default() -> Self {
        Self {
            quad_box: None,
            quad_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KappaSection {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Default for KappaSection {
    fn default() -> Self {
        Self {
            lo: -5.0,
            hi: 5.0,
            n: 101,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LangevinSection {
    pub horizon: f64,
    pub replicas: usize,
    pub burn_in: f64,
    /// Defaults to the target mean, or the origin.
    pub x0: Option<Vec<f64>>,
}

impl Default for LangevinSection {
    fn default() -> Self {
        Self {
            horizon: 200.0,
            replicas: 256,
            burn_in: 0.5,
            x0: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub killing: KillingConfig,
    #[serde(default)]
    pub scheme: SchemeConfig,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub spectral: SpectralSection,
    #[serde(default)]
    pub check: CheckSection,
    #[serde(default)]
    pub kappa: KappaSection,
    #[serde(default)]
    pub langevin: LangevinSection,
    #[serde(default = "default_output")]
    pub output: String,
}

fn default_output() -> String {
    "out".into()
}

pub const PRESETS: &[(&str, &str)] = &[
    ("figure1", include_str!("../../presets/figure1.json")),
    ("gaussian-bm", include_str!("../../presets/gaussian-bm.json")),
    ("cauchy-bm", include_str!("../../presets/cauchy-bm.json")),
    ("langevin-stationary", include_str!("../../presets/langevin-stationary.json")),
];

fn positive(v: f64, field: &str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{field} must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    /// Parses and validates a JSON document. Errors carry the line and column.
    pub fn from_json(src: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(src).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let (_, src) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
            let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            Error::Config(format!("unknown preset `{name}` (known: {})", names.join(", ")))
        })?;
        Self::from_json(src)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn search_box(&self) -> Result<SearchBox> {
        self.killing.search_box.resolve(self.dim(), "killing.search_box")
    }

    pub fn quad_box(&self) -> Result<SearchBox> {
        match &self.check.quad_box {
            Some(b) => b.resolve(self.dim(), "check.quad_box"),
            None => self.search_box(),
        }
    }

    pub fn build_model(&self) -> Result<Model> {
        self.model
            .build(&self.search_box()?)
            .map_err(|e| match e {
                Error::Parameter(m) => Error::Config(format!("model: {m}")),
                other => other,
            })
    }

    /// Checks every field; nothing is computed before this passes.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::Config("model: dimension must be at least 1".into()));
        }
        match &self.model {
            ModelConfig::Gaussian { mean, var } | ModelConfig::GaussianMatched { mean, var } => {
                if mean.len() != var.len() {
                    return Err(Error::Config("model: mean and var lengths differ".into()));
                }
                for v in var {
                    positive(*v, "model.var")?;
                }
            }
            ModelConfig::ExpTail { beta } => positive(*beta, "model.beta")?,
            ModelConfig::OuExample { tau2, sigma2, nu, mu } => {
                positive(*tau2, "model.tau2")?;
                positive(*sigma2, "model.sigma2")?;
                if !(nu.is_finite() && mu.is_finite()) {
                    return Err(Error::Config("model: nu and mu must be finite".into()));
                }
            }
            ModelConfig::Custom { log_density, potential } => {
                if potential.grad.len() != d {
                    return Err(Error::Config(format!(
                        "model: log_density has {d} gradient components, potential has {}",
                        potential.grad.len()
                    )));
                }
                let _ = log_density;
            }
            ModelConfig::Cauchy => {}
        }
        self.search_box()?;
        self.quad_box()?;
        positive(self.killing.tol, "killing.tol")?;
        if let Some(k) = self.killing.k_override {
            if !k.is_finite() {
                return Err(Error::Config("killing.k_override must be finite".into()));
            }
        }
        positive(self.check.quad_tol, "check.quad_tol")?;
        positive(self.scheme.dt, "scheme.dt")?;

        let e = &self.ensemble;
        if e.replicas == 0 {
            return Err(Error::Config("ensemble.replicas must be positive".into()));
        }
        positive(e.horizon, "ensemble.horizon")?;
        for w in e.checkpoints.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::Config("ensemble.checkpoints must be strictly increasing".into()));
            }
        }
        for &t in &e.checkpoints {
            if !(t >= 0.0 && t <= e.horizon) {
                return Err(Error::Config(format!(
                    "ensemble.checkpoints: {t} outside [0, {}]",
                    e.horizon
                )));
            }
        }
        if e.x0.is_some() && e.initial.is_some() {
            return Err(Error::Config("ensemble: give either x0 or initial, not both".into()));
        }
        let start_dim = match (&e.x0, &e.initial) {
            (Some(x), _) | (None, Some(InitialSpec::Point(x))) => Some(x.len()),
            (None, Some(InitialSpec::Normal { mean, var })) => {
                if mean.len() != var.len() {
                    return Err(Error::Config("ensemble.initial.normal: mean and var lengths differ".into()));
                }
                for v in var {
                    positive(*v, "ensemble.initial.normal.var")?;
                }
                Some(mean.len())
            }
            _ => None,
        };
        if let Some(n) = start_dim {
            if n != d {
                return Err(Error::Config(format!("ensemble: starting point has {n} coordinates, model has {d}")));
            }
        }
        if let Binning::Bins(0) = e.binning {
            return Err(Error::Config("ensemble.binning: need at least one bin".into()));
        }
        if let Some([lo, hi]) = e.fit_window {
            if !(lo < hi && lo >= 0.0 && hi <= e.horizon) {
                return Err(Error::Config(format!("ensemble.fit_window [{lo}, {hi}] is not inside the run")));
            }
        }

        let s = &self.spectral;
        if !(s.lo < s.hi && s.lo.is_finite() && s.hi.is_finite()) {
            return Err(Error::Config(format!("spectral: empty grid [{}, {}]", s.lo, s.hi)));
        }
        if s.n < 3 * crate::spectral::generator::RESIDUAL_SKIP || s.k == 0 || s.k > s.n {
            return Err(Error::Config(format!("spectral: need 1 ≤ k ≤ n and n ≥ 15, got k = {}, n = {}", s.k, s.n)));
        }

        let k = &self.kappa;
        if !(k.lo < k.hi && k.lo.is_finite() && k.hi.is_finite()) || k.n < 2 {
            return Err(Error::Config("kappa: need lo < hi and n ≥ 2".into()));
        }

        let l = &self.langevin;
        positive(l.horizon, "langevin.horizon")?;
        if l.replicas < 2 {
            return Err(Error::Config("langevin.replicas must be at least 2".into()));
        }
        if !(0.0..1.0).contains(&l.burn_in) {
            return Err(Error::Config("langevin.burn_in must lie in [0, 1)".into()));
        }
        if let Some(x) = &l.x0 {
            if x.len() != d {
                return Err(Error::Config(format!("langevin.x0 has {} coordinates, model has {d}", x.len())));
            }
        }
        if self.output.is_empty() {
            return Err(Error::Config("output must be a nonempty path".into()));
        }
        Ok(())
    }
}
