//! Finite-difference discretization of `L̃ = −(1/2w) ∂(w ∂·) + κ` on a
//! uniform 1-d grid with Dirichlet ends.
//!
//! The flux form
//!
//! ```text
//! (Lf)_i = −(1/(2 w_i h²)) [w_{i+½}(f_{i+1} − f_i) − w_{i−½}(f_i − f_{i−1})] + κ_i f_i
//! ```
//!
//! is symmetric in `⟨f, g⟩ = Σ f_i g_i w_i h`; conjugating by `diag(√w)` gives
//! a symmetric tridiagonal matrix whose eigenvalues are those of `L`. The
//! weight is `γ = e^{2A}` for the killed generator and `π²/γ` for the
//! Langevin (Q-process) generator. Weights are handled in log form.

use serde::Serialize;

use super::tridiag::SymTridiag;
use crate::error::{Error, Result};
use crate::killing::KillingRate;
use crate::model::{DriftSpec, TargetSpec};

/// `n` interior nodes `lo + (i+1)h`, `h = (hi − lo)/(n + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) || n < 3 {
            return Err(Error::Parameter(format!("bad grid [{lo}, {hi}] with {n} nodes")));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn h(&self) -> f64 {
        (self.hi - self.lo) / (self.n + 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.lo + (i + 1) as f64 * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Same box, spacing halved.
    pub fn refined(&self) -> Self {
        Self {
            n: 2 * self.n + 1,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    pub grid: GridSpec,
    /// Symmetrized operator `diag(√w) L diag(√w)⁻¹`.
    pub sym: SymTridiag,
    /// `log w` at the nodes.
    pub log_weight: Vec<f64>,
    /// `log w` at the midpoints `lo + (i + ½)h`, `i = 0..=n`.
    pub log_weight_mid: Vec<f64>,
    pub kappa: Vec<f64>,
    pub warnings: Vec<String>,
}

impl GeneratorMatrix {
    /// Builds the operator for weight `exp(log_weight)` and rate `kappa`.
    pub fn weighted(grid: GridSpec, log_weight: impl Fn(f64) -> f64, kappa: impl Fn(f64) -> f64) -> Result<Self> {
        let h = grid.h();
        let nodes = grid.nodes();
        let lw: Vec<f64> = nodes.iter().map(|&y| log_weight(y)).collect();
        let lm: Vec<f64> = (0..=grid.n).map(|i| log_weight(grid.lo + (i as f64 + 0.5) * h)).collect();
        let k: Vec<f64> = nodes.iter().map(|&y| kappa(y)).collect();
        if let Some(i) = (0..grid.n).find(|&i| !lw[i].is_finite() || !k[i].is_finite()) {
            return Err(Error::eval("generator weight / rate", &[nodes[i]]));
        }
        if let Some(i) = lm.iter().position(|v| !v.is_finite()) {
            return Err(Error::eval("generator weight", &[grid.lo + (i as f64 + 0.5) * h]));
        }
        let c = 0.5 / (h * h);
        let diag: Vec<f64> = (0..grid.n)
            .map(|i| c * ((lm[i] - lw[i]).exp() + (lm[i + 1] - lw[i]).exp()) + k[i])
            .collect();
        let off: Vec<f64> = (0..grid.n - 1)
            .map(|i| -c * (lm[i + 1] - 0.5 * (lw[i] + lw[i + 1])).exp())
            .collect();
        let sym = SymTridiag::new(diag, off)?;
        let (glo, ghi) = sym.gershgorin();
        if !(glo.is_finite() && ghi.is_finite()) {
            return Err(Error::Numeric("Gershgorin bounds are not finite".into()));
        }
        Ok(Self {
            grid,
            sym,
            log_weight: lw,
            log_weight_mid: lm,
            kappa: k,
            warnings: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.grid.n
    }

    pub fn is_empty(&self) -> bool {
        self.grid.n == 0
    }

    /// Applies the unsymmetrized flux-form operator to `f`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let n = self.grid.n;
        let h = self.grid.h();
        let c = 0.5 / (h * h);
        (0..n)
            .map(|i| {
                let right = if i + 1 < n { f[i + 1] } else { 0.0 };
                let left = if i > 0 { f[i - 1] } else { 0.0 };
                let wp = (self.log_weight_mid[i + 1] - self.log_weight[i]).exp();
                let wm = (self.log_weight_mid[i] - self.log_weight[i]).exp();
                -c * (wp * (right - f[i]) - wm * (f[i] - left)) + self.kappa[i] * f[i]
            })
            .collect()
    }

    /// Largest relative violation of `w_i L_{i,i+1} = w_{i+1} L_{i+1,i}`, and of
    /// the transpose symmetry of the conjugated matrix rebuilt from `L`.
    pub fn weighted_symmetry_defect(&self) -> f64 {
        let n = self.grid.n;
        let h = self.grid.h();
        let c = 0.5 / (h * h);
        let mut worst = 0.0f64;
        for i in 0..n - 1 {
            // L_{i,i+1} = −c w_{i+½}/w_i, L_{i+1,i} = −c w_{i+½}/w_{i+1}
            let l_up = -c * (self.log_weight_mid[i + 1] - self.log_weight[i]).exp();
            let l_down = -c * (self.log_weight_mid[i + 1] - self.log_weight[i + 1]).exp();
            // conjugated entries √(w_i/w_j) L_ij
            let s_up = (0.5 * (self.log_weight[i] - self.log_weight[i + 1])).exp() * l_up;
            let s_down = (0.5 * (self.log_weight[i + 1] - self.log_weight[i])).exp() * l_down;
            let scale = s_up.abs().max(f64::MIN_POSITIVE);
            worst = worst.max((s_up - s_down).abs() / scale);
            worst = worst.max((s_up - self.sym.off[i]).abs() / scale);
        }
        worst
    }

    /// Maps a vector of the symmetric form back to function values.
    pub fn unsymmetrize(&self, v: &[f64]) -> Vec<f64> {
        v.iter().zip(&self.log_weight).map(|(x, lw)| x * (-0.5 * lw).exp()).collect()
    }

    /// The `k` smallest eigenvalues, ascending.
    pub fn low_eigenvalues(&self, k: usize) -> Result<Vec<f64>> {
        self.sym.low_eigenvalues(k)
    }

    /// Ground eigenvalue and eigenfunction (positive, unit norm in the weighted
    /// inner product), plus the solver residual.
    pub fn ground_state(&self) -> Result<(f64, Vec<f64>, f64)> {
        let lambda = self.sym.eigenvalue(0)?;
        let (v, residual) = self.sym.eigenvector(lambda)?;
        let mut f = self.unsymmetrize(&v);
        let norm = self.weighted_norm(&f);
        f.iter_mut().for_each(|x| *x /= norm);
        Ok((lambda, f, residual))
    }

    /// `(Σ f_i² w_i h)^{1/2}`.
    pub fn weighted_norm(&self, f: &[f64]) -> f64 {
        let h = self.grid.h();
        f.iter()
            .zip(&self.log_weight)
            .map(|(x, lw)| x * x * lw.exp() * h)
            .sum::<f64>()
            .sqrt()
    }

    /// `exp(−t L) f` via the eigendecomposition of the symmetric form.
    pub fn semigroup_apply(&self, t: f64, f: &[f64]) -> Result<Vec<f64>> {
        let (vals, vecs) = self.sym.eigen_decomposition()?;
        let g: Vec<f64> = f.iter().zip(&self.log_weight).map(|(x, lw)| x * (0.5 * lw).exp()).collect();
        let mut out = vec![0.0; g.len()];
        for (lam, v) in vals.iter().zip(&vecs) {
            let coef = (-t * lam).exp() * v.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
            out.iter_mut().zip(v).for_each(|(o, x)| *o += coef * x);
        }
        Ok(self.unsymmetrize(&out))
    }
}

/// `φ = exp(U − 2A)` is below `1e-6` of its peak at both ends of the grid?
fn decay_warning(grid: &GridSpec, log_phi: impl Fn(f64) -> f64) -> Option<String> {
    let peak = (0..grid.n).map(|i| log_phi(grid.node(i))).fold(f64::NEG_INFINITY, f64::max);
    let ends = log_phi(grid.lo).max(log_phi(grid.hi));
    (ends - peak > 1e-6f64.ln()).then(|| {
        format!(
            "grid [{}, {}] too narrow: φ at the endpoints is {:.3e} of its peak",
            grid.lo,
            grid.hi,
            (ends - peak).exp()
        )
    })
}

fn ensure_1d(target: &TargetSpec, drift: &DriftSpec) -> Result<()> {
    if target.dim() != 1 || drift.dim() != 1 {
        return Err(Error::Inapplicable("the generator discretization is 1-d only".into()));
    }
    Ok(())
}

/// `−½Δ − ∇A·∇ + κ` with weight `γ = e^{2A}`.
pub fn discretize_generator(
    target: &TargetSpec,
    drift: &DriftSpec,
    kappa: &(impl KillingRate + ?Sized),
    grid: GridSpec,
) -> Result<GeneratorMatrix> {
    ensure_1d(target, drift)?;
    let mut m = GeneratorMatrix::weighted(grid, |y| drift.gamma_log(&[y]), |y| kappa.rate(&[y]))?;
    m.warnings
        .extend(decay_warning(&grid, |y| target.log_density.value(&[y]) - drift.gamma_log(&[y])));
    Ok(m)
}

/// Generator of the Langevin diffusion `dZ = (∇U − ∇A) dt + dW`, in the
/// `π²/γ`-weighted form, with no killing.
pub fn discretize_langevin(target: &TargetSpec, drift: &DriftSpec, grid: GridSpec) -> Result<GeneratorMatrix> {
    ensure_1d(target, drift)?;
    let log_rho = |y: f64| 2.0 * target.log_density.value(&[y]) - drift.gamma_log(&[y]);
    let mut m = GeneratorMatrix::weighted(grid, log_rho, |_| 0.0)?;
    m.warnings.extend(decay_warning(&grid, |y| 0.5 * log_rho(y)));
    Ok(m)
}

/// `φ = exp(U − 2A)` on the nodes, unit norm in `L²(Γ)`.
pub fn phi_on_grid(target: &TargetSpec, drift: &DriftSpec, m: &GeneratorMatrix) -> Vec<f64> {
    let nodes = m.grid.nodes();
    let logs: Vec<f64> = nodes
        .iter()
        .map(|&y| target.log_density.value(&[y]) - drift.gamma_log(&[y]))
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut phi: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let norm = m.weighted_norm(&phi);
    phi.iter_mut().for_each(|x| *x /= norm);
    phi
}

/// Boundary layers excluded from the residual.
pub const RESIDUAL_SKIP: usize = 5;

/// `max_i |(Lφ)_i − Kφ_i| / max_i |φ_i|` over the interior, with `K` the
/// killing shift.
pub fn eigenfunction_residual(
    target: &TargetSpec,
    drift: &DriftSpec,
    kappa: &(impl KillingRate + ?Sized),
    shift_k: f64,
    grid: GridSpec,
) -> Result<f64> {
    let m = discretize_generator(target, drift, kappa, grid)?;
    let phi = phi_on_grid(target, drift, &m);
    let lphi = m.apply(&phi);
    let n = grid.n;
    if n <= 2 * RESIDUAL_SKIP {
        return Err(Error::Parameter(format!("grid of {n} nodes is too small")));
    }
    let peak = phi.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let worst = (RESIDUAL_SKIP..n - RESIDUAL_SKIP)
        .map(|i| (lphi[i] - shift_k * phi[i]).abs())
        .fold(0.0f64, f64::max);
    Ok(worst / peak)
}

/// Relative weighted-L² error of `e^{tK} exp(−tL) φ` against `φ`.
pub fn semigroup_invariance_error(m: &GeneratorMatrix, phi: &[f64], shift_k: f64, t: f64) -> Result<f64> {
    let evolved = m.semigroup_apply(t, phi)?;
    let scale = (t * shift_k).exp();
    let diff: Vec<f64> = evolved.iter().zip(phi).map(|(e, p)| scale * e - p).collect();
    Ok(m.weighted_norm(&diff) / m.weighted_norm(phi))
}
