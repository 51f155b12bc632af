//! Closed forms for an OU diffusion (stationary law `N(ν, τ²)`) killed so as
//! to have quasi-limiting law `N(μ, σ²)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OuParams {
    pub nu: f64,
    pub tau2: f64,
    pub mu: f64,
    pub sigma2: f64,
}

impl OuParams {
    /// `ν = 2, τ² = 4, μ = −1, σ² = 2`.
    pub fn figure1() -> Self {
        Self {
            nu: 2.0,
            tau2: 4.0,
            mu: -1.0,
            sigma2: 2.0,
        }
    }

    pub fn validate_positive(&self) -> Result<()> {
        if ![self.nu, self.tau2, self.mu, self.sigma2].iter().all(|v| v.is_finite()) {
            return Err(Error::Parameter("OU parameters must be finite".into()));
        }
        if !(self.tau2 > 0.0 && self.sigma2 > 0.0) {
            return Err(Error::Parameter(format!(
                "OU variances must be positive (tau2 = {}, sigma2 = {})",
                self.tau2, self.sigma2
            )));
        }
        Ok(())
    }

    /// Positive variances and diffusion tails heavier than the target's (`τ² > σ²`).
    pub fn validate(&self) -> Result<()> {
        self.validate_positive()?;
        if !(self.tau2 > self.sigma2) {
            return Err(Error::Parameter(format!(
                "need tau2 > sigma2 (diffusion tails heavier than the target), got tau2 = {}, sigma2 = {}",
                self.tau2, self.sigma2
            )));
        }
        Ok(())
    }

    /// `κ̃(y)` in closed form.
    pub fn kappa_tilde(&self, y: f64) -> f64 {
        let (s2, t2) = (self.sigma2, self.tau2);
        0.5 * ((y - self.mu).powi(2) / (s2 * s2) - 1.0 / s2 + (self.nu - y) * (y - self.mu) / (t2 * s2) + 1.0 / t2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OuKilling {
    /// `K = −inf κ̃`.
    pub k: f64,
    /// Minimizer of κ̃ (zero of κ).
    pub y_star: f64,
    /// `κ(y) = leading_coeff · (y − y*)²`.
    pub leading_coeff: f64,
}

pub fn ou_killing_constants(p: &OuParams) -> Result<OuKilling> {
    p.validate()?;
    let (s2, t2) = (p.sigma2, p.tau2);
    let k = (p.mu - p.nu).powi(2) / (8.0 * t2 * (t2 - s2)) + (t2 - s2) / (2.0 * t2 * s2);
    let mid = 0.5 * (p.mu + p.nu);
    let y_star = mid + t2 / (t2 - s2) * (p.mu - mid);
    let leading_coeff = (t2 - s2) / (2.0 * t2 * s2 * s2);
    Ok(OuKilling { k, y_star, leading_coeff })
}

/// Stationary law of the Langevin diffusion targeting `π²/γ`: `(mean, var)`.
pub fn ou_qprocess(p: &OuParams) -> Result<(f64, f64)> {
    p.validate()?;
    let (s2, t2) = (p.sigma2, p.tau2);
    let denom = 2.0 * t2 - s2;
    Ok(((2.0 * p.mu * t2 - p.nu * s2) / denom, s2 * t2 / denom))
}

/// `λ_n = n(2τ² − σ²)/(2σ²τ²)` for `n = 0..=n_max`, and the gap `λ₁ − λ₀`.
pub fn ou_spectrum(p: &OuParams, n_max: usize) -> Result<(Vec<f64>, f64)> {
    p.validate()?;
    let (s2, t2) = (p.sigma2, p.tau2);
    let step = (2.0 * t2 - s2) / (2.0 * s2 * t2);
    Ok(((0..=n_max).map(|n| n as f64 * step).collect(), step))
}
