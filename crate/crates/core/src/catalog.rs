//! Built-in models selectable by key.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{self, CauchyLog, Constant, ExpTailLog, ExprField, Field, GaussianLog, Scaled};
use crate::model::{DriftKind, DriftSpec, SearchBox, TargetSpec};
pub use crate::spectral::ou::OuParams;

/// Closed-form facts about a model, when known.
#[derive(Debug, Clone, PartialEq)]
pub enum Known {
    /// Gaussian target, `A ≡ 0` (killed Brownian motion).
    GaussianBm { mean: Vec<f64>, var: Vec<f64> },
    /// Gaussian target with `γ ∝ π` (no killing).
    GaussianMatched { mean: Vec<f64>, var: Vec<f64> },
    Ou(OuParams),
    Nothing,
}

/// A target density paired with the diffusion that should sample it.
#[derive(Debug, Clone)]
pub struct Model {
    pub name: String,
    pub target: TargetSpec,
    pub drift: DriftSpec,
    pub known: Known,
}

impl Model {
    pub fn dim(&self) -> usize {
        self.target.dim()
    }

    /// Gaussian target `N(mean, diag(var))` sampled by killed Brownian motion.
    pub fn gaussian(mean: Vec<f64>, var: Vec<f64>) -> Result<Self> {
        let d = mean.len();
        let u = GaussianLog::normalized(mean.clone(), var.clone())?;
        Ok(Self {
            name: "gaussian".into(),
            target: TargetSpec::new(Arc::new(u)),
            drift: DriftSpec::new(Arc::new(Constant { dim: d, c: 0.0 }), DriftKind::Zero),
            known: Known::GaussianBm { mean, var },
        })
    }

    /// Gaussian target with `A = U/2`, so `π = γ` and `κ̃ ≡ 0`.
    pub fn gaussian_matched(mean: Vec<f64>, var: Vec<f64>) -> Result<Self> {
        let u: Field = Arc::new(GaussianLog::normalized(mean.clone(), var.clone())?);
        let a = Scaled {
            inner: u.clone(),
            factor: 0.5,
        };
        let kind = match (mean.as_slice(), var.as_slice()) {
            ([m], [v]) => DriftKind::Ou { nu: *m, tau2: *v },
            _ => DriftKind::General,
        };
        Ok(Self {
            name: "gaussian-matched".into(),
            target: TargetSpec::new(u),
            drift: DriftSpec::new(Arc::new(a), kind),
            known: Known::GaussianMatched { mean, var },
        })
    }

    /// Standard Cauchy target, killed Brownian motion.
    pub fn cauchy() -> Self {
        Self {
            name: "cauchy".into(),
            target: TargetSpec::new(Arc::new(CauchyLog)),
            drift: DriftSpec::new(Arc::new(Constant { dim: 1, c: 0.0 }), DriftKind::Zero),
            known: Known::Nothing,
        }
    }

    /// `π ∝ exp(−β√(1+y²))`, killed Brownian motion.
    pub fn exp_tail(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Parameter(format!("beta must be positive, got {beta}")));
        }
        Ok(Self {
            name: "exp-tail".into(),
            target: TargetSpec::new(Arc::new(ExpTailLog { beta })),
            drift: DriftSpec::new(Arc::new(Constant { dim: 1, c: 0.0 }), DriftKind::Zero),
            known: Known::Nothing,
        })
    }

    /// OU diffusion with stationary law `N(ν, τ²)` targeting `N(μ, σ²)`.
    ///
    /// Any positive variances are accepted here; the closed-form oracles in
    /// [`crate::spectral::ou`] additionally need `τ² > σ²`.
    pub fn ou_example(p: OuParams) -> Result<Self> {
        p.validate_positive()?;
        let target = GaussianLog::normalized(vec![p.mu], vec![p.sigma2])?;
        let a = Scaled {
            inner: Arc::new(GaussianLog::new(vec![p.nu], vec![p.tau2], 0.0)?),
            factor: 0.5,
        };
        Ok(Self {
            name: "ou-example".into(),
            target: TargetSpec::new(Arc::new(target)),
            drift: DriftSpec::new(
                Arc::new(a),
                DriftKind::Ou {
                    nu: p.nu,
                    tau2: p.tau2,
                },
            ),
            known: Known::Ou(p),
        })
    }

    /// Fields given as expressions; derivatives are checked against finite
    /// differences on a few points of `check_box`.
    pub fn custom(log_density: &FieldExprs, potential: &FieldExprs, check_box: &SearchBox) -> Result<Self> {
        let u = ExprField::parse(&log_density.value, &log_density.grad, &log_density.laplacian)?;
        let a = ExprField::parse(&potential.value, &potential.grad, &potential.laplacian)?;
        let d = log_density.grad.len();
        if potential.grad.len() != d || check_box.dim() != d {
            return Err(Error::Config(format!(
                "custom model dimensions disagree: U has {d}, A has {}, box has {}",
                potential.grad.len(),
                check_box.dim()
            )));
        }
        let points: Vec<Vec<f64>> = (1..=7)
            .map(|i| {
                (0..d)
                    .map(|k| {
                        let frac = ((i * (k + 3)) % 8) as f64 / 8.0 + 0.0625;
                        let (lo, hi) = (check_box.lo[k].max(-10.0), check_box.hi[k].min(10.0));
                        lo + frac * (hi - lo)
                    })
                    .collect()
            })
            .collect();
        field::check_derivatives(&u, &points, 1e-4, 1e-5)
            .map_err(|e| Error::Config(format!("log_density: {e}")))?;
        field::check_derivatives(&a, &points, 1e-4, 1e-5)
            .map_err(|e| Error::Config(format!("potential: {e}")))?;
        Ok(Self {
            name: "custom".into(),
            target: TargetSpec::new(Arc::new(u)),
            drift: DriftSpec::general(Arc::new(a)),
            known: Known::Nothing,
        })
    }

    /// Mean and variance of the quasi-stationary law per coordinate, when the
    /// target is Gaussian.
    pub fn target_moments(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match &self.known {
            Known::GaussianBm { mean, var } | Known::GaussianMatched { mean, var } => {
                Some((mean.clone(), var.clone()))
            }
            Known::Ou(p) => Some((vec![p.mu], vec![p.sigma2])),
            Known::Nothing => None,
        }
    }
}

/// Expression strings for a field: value, gradient components and Laplacian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldExprs {
    pub value: String,
    pub grad: Vec<String>,
    pub laplacian: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn custom_model_accepts_consistent_and_rejects_wrong_derivatives() {
        let b = SearchBox::cube(1, -5.0, 5.0).unwrap();
        let u = FieldExprs {
            value: "-log(1 + x^2)".into(),
            grad: vec!["-2*x/(1 + x^2)".into()],
            laplacian: "-2*(1 - x^2)/(1 + x^2)^2".into(),
        };
        let a = FieldExprs {
            value: "0".into(),
            grad: vec!["0".into()],
            laplacian: "0".into(),
        };
        assert!(Model::custom(&u, &a, &b).is_ok());
        let wrong = FieldExprs {
            laplacian: "2*(1 - x^2)/(1 + x^2)^2".into(),
            ..u.clone()
        };
        assert!(matches!(Model::custom(&wrong, &a, &b), Err(Error::Config(_))));
    }

    #[test]
    fn ou_example_accepts_light_diffusion_tails_but_not_zero_variance() {
        let mut p = OuParams {
            nu: 2.0,
            tau2: 1.0,
            mu: -1.0,
            sigma2: 2.0,
        };
        assert!(Model::ou_example(p).is_ok());
        p.tau2 = 0.0;
        assert!(Model::ou_example(p).is_err());
    }
}
