//! Spectral oracles: closed forms for the OU example and a discretized killed
//! generator whose eigenvalues can be compared with them.

pub mod generator;
pub mod ou;
pub mod tridiag;

use serde::Serialize;

pub use generator::{
    discretize_generator, discretize_langevin, eigenfunction_residual, phi_on_grid, semigroup_invariance_error,
    GeneratorMatrix, GridSpec,
};
pub use ou::{ou_killing_constants, ou_qprocess, ou_spectrum, OuKilling, OuParams};
pub use tridiag::SymTridiag;

use crate::error::{Error, Result};
use crate::model::{DriftSpec, TargetSpec};

/// `k` smallest eigenvalues of a discretized generator.
pub fn low_eigenvalues(m: &GeneratorMatrix, k: usize) -> Result<Vec<f64>> {
    m.low_eigenvalues(k)
}

/// The prefactor `C′` of the measure-level convergence bound
/// `|P_ψ(X_t ∈ E | τ∂ > t) − π(E)| ≤ C′ e^{−t·gap}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QsdBound {
    pub c_prime: f64,
    pub gap: f64,
    /// `Γ(ℝ)` on the grid.
    pub gamma_mass: f64,
    /// `(∫ψ² dΓ)^{1/2}`.
    pub psi_norm: f64,
    /// `∫ψπ dx` and `∫π dx`, with π scaled so that `‖π/γ‖_{L²(Γ)} = 1`.
    pub psi_pi: f64,
    pub pi_mass: f64,
}

impl QsdBound {
    pub fn at(&self, t: f64) -> f64 {
        self.c_prime * (-t * self.gap).exp()
    }

    /// Earliest time at which the bound drops to `level`.
    pub fn time_to(&self, level: f64) -> f64 {
        ((self.c_prime / level).ln() / self.gap).max(0.0)
    }
}

/// Rectangle-rule integral over the grid nodes of `exp(log_f)`.
fn grid_integral(grid: &GridSpec, log_f: impl Fn(f64) -> f64) -> f64 {
    grid.nodes().iter().map(|&y| log_f(y).exp()).sum::<f64>() * grid.h()
}

/// Builds `C′` for an initial Γ-density `psi` given at the nodes of `grid`.
pub fn qsd_bound(psi: &[f64], target: &TargetSpec, drift: &DriftSpec, gap: f64, grid: &GridSpec) -> Result<QsdBound> {
    if target.dim() != 1 || drift.dim() != 1 {
        return Err(Error::Inapplicable("the convergence bound is evaluated on 1-d grids only".into()));
    }
    if psi.len() != grid.n {
        return Err(Error::Parameter(format!("psi has {} values for {} nodes", psi.len(), grid.n)));
    }
    if psi.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
        return Err(Error::Parameter("psi must be finite and nonnegative".into()));
    }
    if !(gap > 0.0) {
        return Err(Error::Parameter(format!("spectral gap must be positive, got {gap}")));
    }
    let log_gamma = |y: f64| drift.gamma_log(&[y]);
    let gamma_mass = grid_integral(grid, log_gamma);
    let wide = GridSpec::new(
        grid.lo - 0.5 * (grid.hi - grid.lo),
        grid.hi + 0.5 * (grid.hi - grid.lo),
        2 * grid.n + 1,
    )?;
    let wide_mass = grid_integral(&wide, log_gamma);
    if !gamma_mass.is_finite() || (wide_mass - gamma_mass).abs() > 1e-6 * gamma_mass {
        return Err(Error::Inapplicable(format!(
            "Γ-mass grows with the box ({gamma_mass:.6e} → {wide_mass:.6e}); the bound needs Γ(ℝ) < ∞"
        )));
    }
    let h = grid.h();
    let nodes = grid.nodes();
    let psi_gamma: f64 = psi.iter().zip(&nodes).map(|(p, &y)| p * log_gamma(y).exp()).sum::<f64>() * h;
    if (psi_gamma - 1.0).abs() > 1e-6 {
        return Err(Error::Parameter(format!("psi must have unit Γ-integral on the grid, got {psi_gamma}")));
    }
    // π scaled so that φ = π/γ has unit L²(Γ) norm: ∫ π²/γ = 1.
    let log_pi = |y: f64| target.log_density.value(&[y]);
    let l2 = grid_integral(grid, |y| 2.0 * log_pi(y) - log_gamma(y));
    let scale = 1.0 / l2.sqrt();
    let pi_mass = scale * grid_integral(grid, log_pi);
    let psi_pi: f64 = scale * psi.iter().zip(&nodes).map(|(p, &y)| p * log_pi(y).exp()).sum::<f64>() * h;
    let psi_norm = (psi.iter().zip(&nodes).map(|(p, &y)| p * p * log_gamma(y).exp()).sum::<f64>() * h).sqrt();
    let c_prime = 2.0 * psi_norm * gamma_mass.sqrt() / (psi_pi * pi_mass);
    if !c_prime.is_finite() {
        return Err(Error::Numeric("C′ is not finite (ψ and π do not overlap on the grid?)".into()));
    }
    Ok(QsdBound {
        c_prime,
        gap,
        gamma_mass,
        psi_norm,
        psi_pi,
        pi_mass,
    })
}

/// `C′ e^{−t·gap}`.
pub fn qsd_error_bound(
    psi: &[f64],
    target: &TargetSpec,
    drift: &DriftSpec,
    gap: f64,
    t: f64,
    grid: &GridSpec,
) -> Result<f64> {
    Ok(qsd_bound(psi, target, drift, gap, grid)?.at(t))
}

/// The Γ-density `f/γ` of a Lebesgue density `f` (given as a log), normalized
/// on the grid.
pub fn gamma_density(log_f: impl Fn(f64) -> f64, drift: &DriftSpec, grid: &GridSpec) -> Vec<f64> {
    let nodes = grid.nodes();
    let mut psi: Vec<f64> = nodes.iter().map(|&y| (log_f(y) - drift.gamma_log(&[y])).exp()).collect();
    let mass: f64 = psi
        .iter()
        .zip(&nodes)
        .map(|(p, &y)| p * drift.gamma_log(&[y]).exp())
        .sum::<f64>()
        * grid.h();
    psi.iter_mut().for_each(|p| *p /= mass);
    psi
}
