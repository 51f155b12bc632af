//! Target density, drift potential and the derived killing rate.
//!
//! For a diffusion `dX = ∇A(X) dt + dW` and a target density π the
//! untranslated killing rate is
//!
//! ```text
//! κ̃ = ½ (Δπ/π − 2∇A·∇π/π − 2ΔA)
//! ```
//!
//! and `κ = κ̃ + K` with `K = −inf κ̃`. All evaluations go through
//! `U = log π`, since π itself underflows in the tails.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::quad;

/// Structural information about a drift used to pick exact transition schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriftKind {
    /// `A ≡ const`: Brownian motion.
    Zero,
    /// `A(y) = −(ν − y)²/(4τ²)`: the OU process with stationary law N(ν, τ²).
    Ou { nu: f64, tau2: f64 },
    General,
}

#[derive(Debug, Clone)]
pub struct TargetSpec {
    /// `U = log π`, possibly unnormalized.
    pub log_density: Field,
}

#[derive(Debug, Clone)]
pub struct DriftSpec {
    /// The potential `A`; the drift is `∇A`.
    pub potential: Field,
    pub kind: DriftKind,
}

impl TargetSpec {
    pub fn new(log_density: Field) -> Self {
        Self { log_density }
    }

    pub fn dim(&self) -> usize {
        self.log_density.dim()
    }
}

impl DriftSpec {
    pub fn new(potential: Field, kind: DriftKind) -> Self {
        Self { potential, kind }
    }

    pub fn general(potential: Field) -> Self {
        Self::new(potential, DriftKind::General)
    }

    pub fn dim(&self) -> usize {
        self.potential.dim()
    }

    /// `log γ = 2A`.
    pub fn gamma_log(&self, y: &[f64]) -> f64 {
        2.0 * self.potential.value(y)
    }

    pub fn drift_at(&self, y: &[f64], out: &mut [f64]) {
        self.potential.gradient(y, out);
    }
}

/// Runs `f` with two zeroed scratch vectors of length `d`, on the stack when small.
#[inline]
pub(crate) fn with_scratch<R>(d: usize, f: impl FnOnce(&mut [f64], &mut [f64]) -> R) -> R {
    if d <= 8 {
        let mut a = [0.0; 8];
        let mut b = [0.0; 8];
        f(&mut a[..d], &mut b[..d])
    } else {
        f(&mut vec![0.0; d], &mut vec![0.0; d])
    }
}

struct Derivs {
    lap_u: f64,
    lap_a: f64,
    grad_u_sq: f64,
    grad_a_dot_grad_u: f64,
}

fn derivatives(target: &TargetSpec, drift: &DriftSpec, y: &[f64]) -> Derivs {
    with_scratch(y.len(), |gu, ga| {
        target.log_density.gradient(y, gu);
        drift.potential.gradient(y, ga);
        Derivs {
            lap_u: target.log_density.laplacian(y),
            lap_a: drift.potential.laplacian(y),
            grad_u_sq: gu.iter().map(|g| g * g).sum(),
            grad_a_dot_grad_u: gu.iter().zip(ga.iter()).map(|(u, a)| u * a).sum(),
        }
    })
}

fn check_finite(target: &TargetSpec, drift: &DriftSpec, y: &[f64]) -> Result<Derivs> {
    if !target.log_density.value(y).is_finite() {
        return Err(Error::eval("log_density", y));
    }
    let d = derivatives(target, drift, y);
    if !(d.lap_u.is_finite() && d.grad_u_sq.is_finite()) {
        return Err(Error::eval("log_density derivatives", y));
    }
    if !(d.lap_a.is_finite() && d.grad_a_dot_grad_u.is_finite()) {
        return Err(Error::eval("potential derivatives", y));
    }
    Ok(d)
}

/// `½(Δπ/π − 2∇A·∇π/π − 2ΔA)(y)` with `Δπ/π = ΔU + ‖∇U‖²`, `∇π/π = ∇U`.
pub fn kappa_tilde_direct(target: &TargetSpec, drift: &DriftSpec, y: &[f64]) -> Result<f64> {
    let d = check_finite(target, drift, y)?;
    let lap_pi_over_pi = d.lap_u + d.grad_u_sq;
    Ok(0.5 * (lap_pi_over_pi - 2.0 * d.grad_a_dot_grad_u - 2.0 * d.lap_a))
}

/// `½(Δ(U − 2A) + ∇U·∇(U − 2A))(y)`.
pub fn kappa_tilde_log(target: &TargetSpec, drift: &DriftSpec, y: &[f64]) -> Result<f64> {
    check_finite(target, drift, y)?;
    Ok(kappa_tilde_log_unchecked(target, drift, y))
}

#[inline]
pub(crate) fn kappa_tilde_log_unchecked(target: &TargetSpec, drift: &DriftSpec, y: &[f64]) -> f64 {
    with_scratch(y.len(), |gu, ga| {
        target.log_density.gradient(y, gu);
        drift.potential.gradient(y, ga);
        let lap_disc = target.log_density.laplacian(y) - 2.0 * drift.potential.laplacian(y);
        let dot: f64 = gu.iter().zip(ga.iter()).map(|(u, a)| u * (u - 2.0 * a)).sum();
        0.5 * (lap_disc + dot)
    })
}

/// Axis-aligned box `[lo_k, hi_k]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SearchBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::Parameter("box bounds must be nonempty and of equal length".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::Parameter(format!("empty or non-finite box {lo:?}..{hi:?}")));
        }
        Ok(Self { lo, hi })
    }

    pub fn cube(d: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; d], vec![hi; d])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// The box scaled by `factor` about its center.
    pub fn scaled(&self, factor: f64) -> Self {
        let (lo, hi) = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| {
                let (c, r) = (0.5 * (l + h), 0.5 * (h - l));
                (c - factor * r, c + factor * r)
            })
            .unzip();
        Self { lo, hi }
    }

    fn axis_points(&self, per_axis: usize) -> Vec<Vec<f64>> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (0..per_axis).map(|i| l + (h - l) * i as f64 / (per_axis - 1) as f64).collect())
            .collect()
    }

    /// Visits every point of the tensor grid with `per_axis` nodes per axis.
    fn for_each_grid_point(&self, per_axis: usize, mut f: impl FnMut(&[usize], &[f64])) {
        let axes = self.axis_points(per_axis);
        let d = self.dim();
        let mut idx = vec![0usize; d];
        let mut y: Vec<f64> = axes.iter().map(|a| a[0]).collect();
        loop {
            f(&idx, &y);
            let mut k = 0;
            loop {
                if k == d {
                    return;
                }
                idx[k] += 1;
                if idx[k] < per_axis {
                    y[k] = axes[k][idx[k]];
                    break;
                }
                idx[k] = 0;
                y[k] = axes[k][0];
                k += 1;
            }
        }
    }
}

/// Nodes per axis for the coarse minimization grid: 401 in 1-d and 2-d, and a
/// total budget of about 2·10⁵ points beyond that.
pub fn coarse_grid_size(d: usize) -> usize {
    if d <= 2 {
        401
    } else {
        ((2.0e5f64).powf(1.0 / d as f64).floor() as usize).max(5)
    }
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;
const MAX_GOLDEN_ITERS: usize = 400;
const MAX_SWEEPS: usize = 500;

/// Golden-section minimization of `f` on `[a, b]` until the bracket is below `tol`.
fn golden_section(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..MAX_GOLDEN_ITERS {
        if (b - a).abs() <= tol {
            let x = 0.5 * (a + b);
            let fx = f(x);
            // return the best point seen in the final bracket
            let best = [(x, fx), (c, fc), (d, fd)]
                .into_iter()
                .min_by(|p, q| p.1.total_cmp(&q.1))
                .unwrap();
            return Ok(best);
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
    }
    Err(Error::Tolerance {
        tol,
        iterations: MAX_GOLDEN_ITERS,
    })
}

/// Locates `K = −inf κ̃` over `search_box`.
///
/// A coarse uniform grid is followed by golden-section refinement (1-d) or
/// cyclic coordinate descent with golden-section line searches (d > 1). The
/// sign of `K` is not clamped. Returns `(K, y*)`.
pub fn find_shift_k(
    kappa_tilde: &dyn Fn(&[f64]) -> f64,
    search_box: &SearchBox,
    tol: f64,
) -> Result<(f64, Vec<f64>)> {
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    let d = search_box.dim();
    let n = coarse_grid_size(d);
    let mut best = (f64::INFINITY, vec![0usize; d], vec![0.0; d]);
    let mut bad: Option<Vec<f64>> = None;
    search_box.for_each_grid_point(n, |idx, y| {
        let v = kappa_tilde(y);
        if !v.is_finite() {
            bad.get_or_insert_with(|| y.to_vec());
        } else if v < best.0 {
            best = (v, idx.to_vec(), y.to_vec());
        }
    });
    if let Some(p) = bad {
        return Err(Error::eval("kappa_tilde", &p));
    }
    let (grid_min, idx, mut y) = best;
    let step: Vec<f64> = (0..d)
        .map(|k| (search_box.hi[k] - search_box.lo[k]) / (n - 1) as f64)
        .collect();

    // Boundary minimum with values still decreasing outward: κ̃ may be unbounded below.
    for k in 0..d {
        let at_edge = idx[k] == 0 || idx[k] == n - 1;
        if at_edge {
            let mut inner = y.clone();
            inner[k] += if idx[k] == 0 { step[k] } else { -step[k] };
            if grid_min < kappa_tilde(&inner) {
                return Err(Error::UnboundedBelow { point: y, value: grid_min });
            }
        }
    }

    let clamp = |k: usize, v: f64| v.clamp(search_box.lo[k], search_box.hi[k]);
    let mut value = grid_min;
    if d == 1 {
        let (x, fx) = golden_section(
            |t| kappa_tilde(&[t]),
            clamp(0, y[0] - step[0]),
            clamp(0, y[0] + step[0]),
            tol,
        )?;
        if fx < value {
            value = fx;
            y[0] = x;
        }
    } else {
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            let mut moved = 0.0f64;
            for k in 0..d {
                let mut probe = y.clone();
                let (x, fx) = golden_section(
                    |t| {
                        probe[k] = t;
                        kappa_tilde(&probe)
                    },
                    clamp(k, y[k] - step[k]),
                    clamp(k, y[k] + step[k]),
                    tol,
                )?;
                if fx < value {
                    moved = moved.max((x - y[k]).abs());
                    value = fx;
                    y[k] = x;
                }
            }
            if moved <= tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Tolerance {
                tol,
                iterations: MAX_SWEEPS,
            });
        }
    }
    Ok((-value, y))
}

/// The derived killing rate `κ = κ̃ + K`.
#[derive(Debug, Clone)]
pub struct KillingSpec {
    target: TargetSpec,
    drift: DriftSpec,
    shift: f64,
    minimizer: Option<Vec<f64>>,
    warnings: Vec<String>,
}

/// Rates above `−NEGATIVE_SLACK·(1 + |K|)` count as nonnegative: `κ̃(y) + K`
/// can round slightly below zero at the minimizer.
pub const NEGATIVE_SLACK: f64 = 1e-9;

impl KillingSpec {
    pub fn kappa_tilde(&self, y: &[f64]) -> f64 {
        kappa_tilde_log_unchecked(&self.target, &self.drift, y)
    }

    pub fn kappa(&self, y: &[f64]) -> f64 {
        self.kappa_tilde(y) + self.shift
    }

    pub fn shift_k(&self) -> f64 {
        self.shift
    }

    pub fn minimizer(&self) -> Option<&[f64]> {
        self.minimizer.as_deref()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn target(&self) -> &TargetSpec {
        &self.target
    }

    pub fn drift(&self) -> &DriftSpec {
        &self.drift
    }

    /// `true` when the untranslated rate vanished on the whole validation grid.
    pub fn is_unkilled(&self) -> bool {
        self.shift == 0.0 && self.warnings.iter().any(|w| w.starts_with(NO_KILLING))
    }

    /// Same rate shifted up by `extra`.
    pub fn with_extra_shift(&self, extra: f64) -> Result<Self> {
        if !(extra >= 0.0) {
            return Err(Error::Parameter(format!("extra killing must be nonnegative, got {extra}")));
        }
        let mut k = self.clone();
        k.shift += extra;
        k.warnings.retain(|w| !w.starts_with(NO_KILLING));
        Ok(k)
    }
}

const NO_KILLING: &str = "no killing";

fn validation_grid_size(d: usize) -> usize {
    match d {
        1 => 2001,
        2 => 201,
        _ => ((1.0e5f64).powf(1.0 / d as f64).floor() as usize).max(3),
    }
}

/// Builds `κ = κ̃ + K`, with `K` from `k_override` or from [`find_shift_k`].
pub fn build_killing(
    target: &TargetSpec,
    drift: &DriftSpec,
    k_override: Option<f64>,
    search_box: &SearchBox,
    tol: f64,
) -> Result<KillingSpec> {
    if target.dim() != drift.dim() || target.dim() != search_box.dim() {
        return Err(Error::Parameter(format!(
            "dimension mismatch: target {}, drift {}, box {}",
            target.dim(),
            drift.dim(),
            search_box.dim()
        )));
    }
    let kt = |y: &[f64]| kappa_tilde_log_unchecked(target, drift, y);
    let (shift, minimizer) = match k_override {
        Some(k) if k.is_finite() => (k, None),
        Some(k) => return Err(Error::Parameter(format!("K override must be finite, got {k}"))),
        None => {
            let (k, y) = find_shift_k(&kt, search_box, tol)?;
            (k, Some(y))
        }
    };

    let slack = NEGATIVE_SLACK * (1.0 + shift.abs());
    let mut all_zero = true;
    let mut violation: Option<(Vec<f64>, f64)> = None;
    let mut bad: Option<Vec<f64>> = None;
    search_box.for_each_grid_point(validation_grid_size(search_box.dim()), |_, y| {
        let v = kt(y);
        if !v.is_finite() {
            bad.get_or_insert_with(|| y.to_vec());
            return;
        }
        all_zero &= v.abs() <= 1e-12;
        let kappa = v + shift;
        if kappa < -slack && violation.as_ref().is_none_or(|(_, w)| kappa < *w) {
            violation = Some((y.to_vec(), kappa));
        }
    });
    if let Some(p) = bad {
        return Err(Error::eval("kappa_tilde", &p));
    }
    if let Some((point, value)) = violation {
        return Err(Error::NegativeRate { point, value });
    }
    let mut warnings = Vec::new();
    if all_zero && shift == 0.0 {
        warnings.push(format!("{NO_KILLING}; Langevin stationary case (κ̃ ≡ 0 on the validation grid)"));
    }
    Ok(KillingSpec {
        target: target.clone(),
        drift: drift.clone(),
        shift,
        minimizer,
        warnings,
    })
}

/// Outcome of the numerical assumption checks.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    /// `∫ π²/γ` over the quadrature box.
    pub l2_integral: f64,
    /// Monte Carlo standard error, when the integral was estimated by sampling.
    pub l2_stderr: Option<f64>,
    pub l2_finite: bool,
    /// Largest boundary value of `π²/γ` relative to its peak.
    pub boundary_ratio: f64,
    /// `sup π/γ` on the box, absent when the maximum sits on the boundary.
    pub sup_ratio: Option<f64>,
    /// `inf κ̃` on the box (`−K`).
    pub kappa_lower_bound: f64,
    pub kappa_bounded_below: bool,
    /// `min κ̃` over the outer shell of the box.
    pub liminf_estimate: f64,
    /// Shell minima for the box scaled by 1, 2 and 4.
    pub liminf_trend: Vec<f64>,
    pub spectral_gap_condition: bool,
    /// Failed assumptions.
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Finite ceiling for a boxed `∫ π²/γ` to count as finite.
pub const L2_CEILING: f64 = 1e12;
const BOUNDARY_DECAY: f64 = 1e-8;
const MC_DRAWS: usize = 200_000;

fn shell_min(kt: &dyn Fn(&[f64]) -> f64, b: &SearchBox) -> f64 {
    let d = b.dim();
    let per_axis = match d {
        1 => 4001,
        2 => 401,
        _ => 21,
    };
    let mut min = f64::INFINITY;
    b.for_each_grid_point(per_axis, |_, y| {
        let outer = y
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let (c, r) = (0.5 * (b.lo[k] + b.hi[k]), 0.5 * (b.hi[k] - b.lo[k]));
                (v - c).abs() / r
            })
            .fold(0.0, f64::max);
        if outer >= 0.9 - 1e-12 {
            min = min.min(kt(y));
        }
    });
    min
}

/// Checks the regularity, integrability and lower-bound conditions plus the
/// spectral-gap sufficient condition on a box.
pub fn check_assumptions(
    target: &TargetSpec,
    drift: &DriftSpec,
    quad_box: &SearchBox,
    quad_tol: f64,
) -> Result<AssumptionReport> {
    let d = target.dim();
    if drift.dim() != d || quad_box.dim() != d {
        return Err(Error::Parameter("dimension mismatch between target, drift and box".into()));
    }
    let mut violations = Vec::new();
    let mut warnings = Vec::new();
    let log_ratio = |y: &[f64]| target.log_density.value(y) - drift.gamma_log(y);
    let integrand = |y: &[f64]| (2.0 * target.log_density.value(y) - drift.gamma_log(y)).exp();

    // Finiteness and the sup of π/γ on a grid.
    let per_axis = match d {
        1 => 4001,
        2 => 401,
        _ => 21,
    };
    let mut peak = f64::NEG_INFINITY;
    let (mut sup_inner, mut sup_edge) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut boundary_max = f64::NEG_INFINITY;
    let mut bad: Option<Vec<f64>> = None;
    quad_box.for_each_grid_point(per_axis, |idx, y| {
        let u = target.log_density.value(y);
        let r = log_ratio(y);
        if !u.is_finite() || !r.is_finite() {
            bad.get_or_insert_with(|| y.to_vec());
            return;
        }
        let on_edge = idx.iter().any(|&i| i == 0 || i == per_axis - 1);
        let v = 2.0 * u - drift.gamma_log(y);
        peak = peak.max(v);
        if on_edge {
            boundary_max = boundary_max.max(v);
        }
        if on_edge {
            sup_edge = sup_edge.max(r);
        } else {
            sup_inner = sup_inner.max(r);
        }
    });
    if let Some(p) = bad {
        return Err(Error::eval("log_density / potential", &p));
    }
    let boundary_ratio = (boundary_max - peak).exp();
    let sup_ratio = if sup_edge > sup_inner + 1e-12 * (1.0 + sup_inner.abs()) {
        warnings.push("π/γ is largest on the box boundary; rejection-sampling bound not established".into());
        None
    } else {
        Some(sup_inner.max(sup_edge).exp())
    };

    // ∫π²/γ.
    let (l2_integral, l2_stderr) = match d {
        1 => (
            quad::adaptive_simpson(|x| integrand(&[x]), quad_box.lo[0], quad_box.hi[0], quad_tol),
            None,
        ),
        2 => (
            quad::adaptive_simpson_2d(
                |x, y| integrand(&[x, y]),
                [quad_box.lo[0], quad_box.lo[1]],
                [quad_box.hi[0], quad_box.hi[1]],
                quad_tol,
            ),
            None,
        ),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f_a55e);
            let vol: f64 = quad_box.lo.iter().zip(&quad_box.hi).map(|(l, h)| h - l).product();
            let mut y = vec![0.0; d];
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..MC_DRAWS {
                for k in 0..d {
                    y[k] = rng.random_range(quad_box.lo[k]..quad_box.hi[k]);
                }
                let v = integrand(&y);
                s1 += v;
                s2 += v * v;
            }
            let n = MC_DRAWS as f64;
            let mean = s1 / n;
            let var = (s2 / n - mean * mean).max(0.0);
            (vol * mean, Some(vol * (var / n).sqrt()))
        }
    };
    if !l2_integral.is_finite() {
        return Err(Error::eval("π²/γ", &quad_box.lo));
    }
    let decayed = boundary_ratio <= BOUNDARY_DECAY;
    if !decayed {
        warnings.push(format!(
            "π²/γ at the box boundary is {boundary_ratio:.3e} of its peak; the box may not cover the mass"
        ));
    }
    // Slow decay is tolerated when the integral has settled: doubling the box
    // must change it by less than 1e-3 relative.
    let settled = decayed || {
        let wide = quad_box.scaled(2.0);
        let wider = match d {
            1 => quad::adaptive_simpson(|x| integrand(&[x]), wide.lo[0], wide.hi[0], quad_tol),
            2 => quad::adaptive_simpson_2d(
                |x, y| integrand(&[x, y]),
                [wide.lo[0], wide.lo[1]],
                [wide.hi[0], wide.hi[1]],
                quad_tol,
            ),
            _ => f64::INFINITY,
        };
        (wider - l2_integral).abs() <= 1e-3 * l2_integral
    };
    let l2_finite = l2_integral < L2_CEILING && settled;
    if !l2_finite {
        violations.push("integrability: ∫π²/γ < ∞ not established on the quadrature box".into());
    }

    // κ̃ bounded below.
    let kt = |y: &[f64]| kappa_tilde_log_unchecked(target, drift, y);
    let tol = 1e-9 * quad_box.hi.iter().zip(&quad_box.lo).map(|(h, l)| h - l).fold(0.0, f64::max);
    let (kappa_lower_bound, kappa_bounded_below) = match find_shift_k(&kt, quad_box, tol) {
        Ok((k, _)) => (-k, true),
        Err(Error::UnboundedBelow { value, .. }) => {
            violations.push("lower bound: κ̃ may be unbounded below (minimum on the box boundary)".into());
            (value, false)
        }
        Err(e) => return Err(e),
    };

    // Spectral-gap sufficient condition: liminf κ̃ > 0.
    let liminf_trend: Vec<f64> = [1.0, 2.0, 4.0]
        .iter()
        .map(|&s| shell_min(&kt, &quad_box.scaled(s)))
        .collect();
    let liminf_estimate = liminf_trend[0];
    let decaying_to_zero = liminf_trend[2] < 0.5 * liminf_trend[0];
    let spectral_gap_condition = liminf_estimate > 0.0 && !decaying_to_zero;
    if !spectral_gap_condition {
        warnings.push(format!(
            "spectral-gap sufficient condition fails: shell minima of κ̃ {liminf_trend:?} do not stay bounded away from 0"
        ));
    }

    Ok(AssumptionReport {
        l2_integral,
        l2_stderr,
        l2_finite,
        boundary_ratio,
        sup_ratio,
        kappa_lower_bound,
        kappa_bounded_below,
        liminf_estimate,
        liminf_trend,
        spectral_gap_condition,
        violations,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{Model, OuParams};

    fn ou() -> Model {
        Model::ou_example(OuParams::figure1()).unwrap()
    }

    fn kt(m: &Model) -> impl Fn(&[f64]) -> f64 + '_ {
        move |y| kappa_tilde_log_unchecked(&m.target, &m.drift, y)
    }

    #[test]
    fn kappa_tilde_hand_values() {
        let g = Model::gaussian(vec![0.0], vec![2.0]).unwrap();
        assert!((kappa_tilde_direct(&g.target, &g.drift, &[0.0]).unwrap() + 0.25).abs() < 1e-15);
        let c = Model::cauchy();
        assert!((kappa_tilde_direct(&c.target, &c.drift, &[1.0]).unwrap() - 0.5).abs() < 1e-15);
        let o = ou();
        assert!((kappa_tilde_direct(&o.target, &o.drift, &[-2.5]).unwrap() + 17.0 / 64.0).abs() < 1e-14);
        assert!((kappa_tilde_log(&o.target, &o.drift, &[0.0]).unwrap() - 0.125).abs() < 1e-14);
        assert!((kappa_tilde_direct(&o.target, &o.drift, &[0.0]).unwrap() - 0.125).abs() < 1e-14);
    }

    #[test]
    fn matched_target_has_zero_discrepancy() {
        let m = Model::gaussian_matched(vec![0.3], vec![1.7]).unwrap();
        for y in [-9.0, -1.0, 0.0, 2.5, 40.0] {
            assert!(kappa_tilde_log(&m.target, &m.drift, &[y]).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn non_finite_field_names_the_field() {
        let m = Model::custom(
            &crate::catalog::FieldExprs {
                value: "log(x)".into(),
                grad: vec!["1/x".into()],
                laplacian: "-1/x^2".into(),
            },
            &crate::catalog::FieldExprs {
                value: "0".into(),
                grad: vec!["0".into()],
                laplacian: "0".into(),
            },
            &SearchBox::cube(1, 0.5, 3.0).unwrap(),
        )
        .unwrap();
        let err = kappa_tilde_direct(&m.target, &m.drift, &[-1.0]).unwrap_err();
        assert!(err.to_string().contains("log_density"), "{err}");
    }

    #[test]
    fn shift_hand_values() {
        let b = SearchBox::cube(1, -50.0, 50.0).unwrap();
        let o = ou();
        let (k, y) = find_shift_k(&kt(&o), &b, 1e-10).unwrap();
        assert!((k - 17.0 / 64.0).abs() < 1e-12);
        assert!((y[0] + 2.5).abs() < 1e-6);

        let g = Model::gaussian(vec![0.0], vec![2.0]).unwrap();
        let (k, y) = find_shift_k(&kt(&g), &b, 1e-10).unwrap();
        assert!((k - 0.25).abs() < 1e-12 && y[0].abs() < 1e-6);

        let c = Model::cauchy();
        let (k, y) = find_shift_k(&kt(&c), &b, 1e-10).unwrap();
        assert!((k - 1.0).abs() < 1e-12 && y[0].abs() < 1e-6);
    }

    #[test]
    fn shift_is_stable_under_box_doubling() {
        let tol = 1e-9;
        for m in [ou(), Model::gaussian(vec![0.0], vec![2.0]).unwrap()] {
            let b = SearchBox::cube(1, -50.0, 50.0).unwrap();
            let (k1, _) = find_shift_k(&kt(&m), &b, tol).unwrap();
            let (k2, _) = find_shift_k(&kt(&m), &b.scaled(2.0), tol).unwrap();
            assert!((k1 - k2).abs() < tol, "{k1} vs {k2}");
        }
    }

    #[test]
    fn shift_in_two_dimensions() {
        let g = Model::gaussian(vec![1.0, -2.0], vec![2.0, 0.5]).unwrap();
        let b = SearchBox::cube(2, -10.0, 10.0).unwrap();
        let (k, y) = find_shift_k(&kt(&g), &b, 1e-10).unwrap();
        assert!((k - 0.5 * (0.5 + 2.0)).abs() < 1e-10);
        assert!((y[0] - 1.0).abs() < 1e-5 && (y[1] + 2.0).abs() < 1e-5);
    }

    #[test]
    fn light_diffusion_tails_are_unbounded_below() {
        let m = Model::ou_example(OuParams {
            tau2: 1.0,
            ..OuParams::figure1()
        })
        .unwrap();
        let b = SearchBox::cube(1, -50.0, 50.0).unwrap();
        assert!(matches!(find_shift_k(&kt(&m), &b, 1e-9), Err(Error::UnboundedBelow { .. })));
        assert!(find_shift_k(&kt(&m), &b, 0.0).is_err());
    }

    #[test]
    fn build_killing_examples() {
        let b = SearchBox::cube(1, -50.0, 50.0).unwrap();
        let o = ou();
        let k = build_killing(&o.target, &o.drift, None, &b, 1e-10).unwrap();
        for y in [-30.0, -2.5, 0.0, 3.0, 17.0] {
            let want = (y + 2.5f64).powi(2) / 16.0;
            assert!((k.kappa(&[y]) - want).abs() < 1e-11 * (1.0 + want));
            assert!((k.kappa(&[y]) - k.kappa_tilde(&[y]) - k.shift_k()).abs() <= f64::EPSILON * (k.kappa_tilde(&[y]).abs() + k.shift_k()));
        }
        assert!((k.minimizer().unwrap()[0] + 2.5).abs() < 1e-6);

        let g = Model::gaussian(vec![0.0], vec![2.0]).unwrap();
        let k = build_killing(&g.target, &g.drift, None, &b, 1e-10).unwrap();
        assert!((k.kappa(&[4.0]) - 2.0).abs() < 1e-11);

        let up = build_killing(&g.target, &g.drift, Some(1.25), &b, 1e-10).unwrap();
        assert!((up.kappa(&[4.0]) - 3.0).abs() < 1e-11);
        assert!(up.minimizer().is_none());

        match build_killing(&g.target, &g.drift, Some(0.2), &b, 1e-10) {
            Err(Error::NegativeRate { point, value }) => {
                assert!(point[0].abs() < 0.1 && value < 0.0);
            }
            other => panic!("expected a negative-rate error, got {other:?}"),
        }
    }

    #[test]
    fn matched_case_warns_no_killing() {
        let m = Model::gaussian_matched(vec![0.0], vec![1.0]).unwrap();
        let b = SearchBox::cube(1, -20.0, 20.0).unwrap();
        let k = build_killing(&m.target, &m.drift, None, &b, 1e-10).unwrap();
        assert!(k.is_unkilled());
        assert!(k.warnings()[0].contains("no killing; Langevin stationary case"));
        assert!(!k.with_extra_shift(0.5).unwrap().is_unkilled());
    }

    #[test]
    fn ou_assumption_report() {
        let o = ou();
        let b = SearchBox::cube(1, -40.0, 40.0).unwrap();
        let r = check_assumptions(&o.target, &o.drift, &b, 1e-10).unwrap();
        // π²/γ = N(−1,2)² e^{(y−2)²/8}: a Gaussian in y with mean −2, variance 4/3
        let (m, v) = (-2.0f64, 4.0f64 / 3.0);
        let log_prefactor = -(2.0 * std::f64::consts::PI * 2.0).ln() - 0.25 * ((-1.0f64 - m).powi(2) * 2.0)
            + ((m - 2.0) * (m - 2.0)) / 8.0
            - 0.5 * (m + 1.0).powi(2) / 2.0 * 2.0
            + 0.5 * (m + 1.0).powi(2);
        let exact = log_prefactor.exp() * (2.0 * std::f64::consts::PI * v).sqrt();
        let direct = crate::quad::adaptive_simpson(
            |y| (2.0 * o.target.log_density.value(&[y]) - o.drift.gamma_log(&[y])).exp(),
            -40.0,
            40.0,
            1e-12,
        );
        assert!((direct - exact).abs() < 1e-9 * exact, "{direct} vs {exact}");
        assert!((r.l2_integral - exact).abs() < 1e-8 * exact);
        assert!(r.l2_finite && r.kappa_bounded_below && r.spectral_gap_condition, "{r:?}");
        assert!(r.passed());
        assert!((r.kappa_lower_bound + 17.0 / 64.0).abs() < 1e-9);
        assert!(r.liminf_trend[1] > r.liminf_trend[0] && r.liminf_trend[2] > r.liminf_trend[1]);
    }

    #[test]
    fn matched_report_has_unit_ratio() {
        let m = Model::gaussian_matched(vec![0.0], vec![1.0]).unwrap();
        let b = SearchBox::cube(1, -20.0, 20.0).unwrap();
        let r = check_assumptions(&m.target, &m.drift, &b, 1e-10).unwrap();
        let gamma_mass = crate::quad::adaptive_simpson(|y| m.drift.gamma_log(&[y]).exp(), -20.0, 20.0, 1e-12);
        assert!((r.l2_integral - gamma_mass).abs() < 1e-9 * gamma_mass);
        assert!((r.sup_ratio.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cauchy_fails_the_gap_condition_only() {
        let c = Model::cauchy();
        let b = SearchBox::cube(1, -50.0, 50.0).unwrap();
        let r = check_assumptions(&c.target, &c.drift, &b, 1e-9).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        assert!(!r.spectral_gap_condition);
        assert!(r.liminf_trend[2] < r.liminf_trend[0]);
        assert!(r.warnings.iter().any(|w| w.contains("spectral-gap sufficient condition fails")));
    }

    #[test]
    fn eigenfunction_relation_pointwise() {
        // φ = e^{U−2A}: ½φ''/φ + A'φ'/φ − κ + K, via the field derivatives
        let o = ou();
        let b = SearchBox::cube(1, -50.0, 50.0).unwrap();
        let k = build_killing(&o.target, &o.drift, None, &b, 1e-12).unwrap();
        let (u, a) = (&o.target.log_density, &o.drift.potential);
        for y in [-11.3, -2.5, -0.7, 0.0, 1.9, 6.4, 13.0] {
            let (mut gu, mut ga) = ([0.0], [0.0]);
            u.gradient(&[y], &mut gu);
            a.gradient(&[y], &mut ga);
            let dl = gu[0] - 2.0 * ga[0];
            let lap = u.laplacian(&[y]) - 2.0 * a.laplacian(&[y]);
            let rel = 0.5 * (lap + dl * dl) + ga[0] * dl - k.kappa(&[y]) + k.shift_k();
            let scale = 1.0 + k.kappa(&[y]);
            assert!(rel.abs() < 1e-8 * scale, "y = {y}: {rel}");
        }
    }
}
