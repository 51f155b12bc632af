//! Smooth scalar fields on ℝ^d bundled with their gradient and Laplacian.
//!
//! Everything downstream (killing rates, drifts, generator stencils) only ever
//! needs a function together with its first and second derivatives, so a field
//! carries all three. Log-densities and drift potentials are both fields.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;

pub trait ScalarField: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn value(&self, y: &[f64]) -> f64;
    fn gradient(&self, y: &[f64], out: &mut [f64]);
    fn laplacian(&self, y: &[f64]) -> f64;
}

/// Shared handle to a field.
pub type Field = Arc<dyn ScalarField>;

/// The constant function `c`.
#[derive(Debug, Clone)]
pub struct Constant {
    pub dim: usize,
    pub c: f64,
}

impl ScalarField for Constant {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, _: &[f64]) -> f64 {
        self.c
    }
    fn gradient(&self, _: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
    fn laplacian(&self, _: &[f64]) -> f64 {
        0.0
    }
}

/// `offset − ½ Σ_k (y_k − mean_k)² / var_k`, the log of an axis-aligned
/// Gaussian density up to `offset`.
#[derive(Debug, Clone)]
pub struct GaussianLog {
    mean: Vec<f64>,
    var: Vec<f64>,
    offset: f64,
}

impl GaussianLog {
    pub fn new(mean: Vec<f64>, var: Vec<f64>, offset: f64) -> Result<Self> {
        if mean.is_empty() || mean.len() != var.len() {
            return Err(Error::Parameter(format!(
                "gaussian needs matching nonempty mean/var (got {} and {})",
                mean.len(),
                var.len()
            )));
        }
        if let Some(v) = var.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::Parameter(format!("gaussian variance {v} must be positive")));
        }
        Ok(Self { mean, var, offset })
    }

    /// Log of the normalized density.
    pub fn normalized(mean: Vec<f64>, var: Vec<f64>) -> Result<Self> {
        let offset = -0.5 * var.iter().map(|v| (2.0 * PI * v).ln()).sum::<f64>();
        Self::new(mean, var, offset)
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn var(&self) -> &[f64] {
        &self.var
    }
}

impl ScalarField for GaussianLog {
    fn dim(&self) -> usize {
        self.mean.len()
    }
    fn value(&self, y: &[f64]) -> f64 {
        let q: f64 = y
            .iter()
            .zip(&self.mean)
            .zip(&self.var)
            .map(|((y, m), v)| (y - m) * (y - m) / v)
            .sum();
        self.offset - 0.5 * q
    }
    fn gradient(&self, y: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = -(y[k] - self.mean[k]) / self.var[k];
        }
    }
    fn laplacian(&self, _: &[f64]) -> f64 {
        -self.var.iter().map(|v| 1.0 / v).sum::<f64>()
    }
}

/// Normalized log-density of the standard Cauchy law, `−log(π(1 + y²))`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CauchyLog;

impl ScalarField for CauchyLog {
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, y: &[f64]) -> f64 {
        -(PI * (1.0 + y[0] * y[0])).ln()
    }
    fn gradient(&self, y: &[f64], out: &mut [f64]) {
        out[0] = -2.0 * y[0] / (1.0 + y[0] * y[0]);
    }
    fn laplacian(&self, y: &[f64]) -> f64 {
        let s = 1.0 + y[0] * y[0];
        -2.0 * (1.0 - y[0] * y[0]) / (s * s)
    }
}

/// `−β √(1 + y²)`: smooth everywhere, with exponential tails `e^{−β|y|}`.
#[derive(Debug, Clone, Copy)]
pub struct ExpTailLog {
    pub beta: f64,
}

impl ScalarField for ExpTailLog {
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, y: &[f64]) -> f64 {
        -self.beta * (1.0 + y[0] * y[0]).sqrt()
    }
    fn gradient(&self, y: &[f64], out: &mut [f64]) {
        out[0] = -self.beta * y[0] / (1.0 + y[0] * y[0]).sqrt();
    }
    fn laplacian(&self, y: &[f64]) -> f64 {
        -self.beta / (1.0 + y[0] * y[0]).powf(1.5)
    }
}

/// `factor · inner`.
#[derive(Debug, Clone)]
pub struct Scaled {
    pub inner: Field,
    pub factor: f64,
}

impl ScalarField for Scaled {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, y: &[f64]) -> f64 {
        self.factor * self.inner.value(y)
    }
    fn gradient(&self, y: &[f64], out: &mut [f64]) {
        self.inner.gradient(y, out);
        out.iter_mut().for_each(|g| *g *= self.factor);
    }
    fn laplacian(&self, y: &[f64]) -> f64 {
        self.factor * self.inner.laplacian(y)
    }
}

/// A field given by expression strings. Derivatives are supplied by the user
/// and checked against finite differences with [`check_derivatives`].
#[derive(Debug, Clone)]
pub struct ExprField {
    value: Expr,
    grad: Vec<Expr>,
    laplacian: Expr,
}

impl ExprField {
    pub fn parse(value: &str, grad: &[String], laplacian: &str) -> Result<Self> {
        let dim = grad.len();
        if dim == 0 {
            return Err(Error::Parameter("custom field needs at least one gradient component".into()));
        }
        let value = Expr::parse(value, dim)?;
        let grad = grad.iter().map(|g| Expr::parse(g, dim)).collect::<Result<Vec<_>>>()?;
        let laplacian = Expr::parse(laplacian, dim)?;
        Ok(Self { value, grad, laplacian })
    }
}

impl ScalarField for ExprField {
    fn dim(&self) -> usize {
        self.grad.len()
    }
    fn value(&self, y: &[f64]) -> f64 {
        self.value.eval(y)
    }
    fn gradient(&self, y: &[f64], out: &mut [f64]) {
        for (o, g) in out.iter_mut().zip(&self.grad) {
            *o = g.eval(y);
        }
    }
    fn laplacian(&self, y: &[f64]) -> f64 {
        self.laplacian.eval(y)
    }
}

/// Central-difference check of a field's gradient and Laplacian at `points`.
///
/// Passes when `|analytic − fd| ≤ rtol · max(1, |analytic|)` plus the
/// unavoidable round-off of a second difference (`~ε|f|/step²`).
pub fn check_derivatives(field: &dyn ScalarField, points: &[Vec<f64>], step: f64, rtol: f64) -> Result<()> {
    let d = field.dim();
    let mut grad = vec![0.0; d];
    let mut y = vec![0.0; d];
    for p in points {
        let f0 = field.value(p);
        field.gradient(p, &mut grad);
        let lap = field.laplacian(p);
        let roundoff = 1e2 * f64::EPSILON * f0.abs().max(1.0) / (step * step);
        let mut fd_lap = 0.0;
        for k in 0..d {
            y.copy_from_slice(p);
            y[k] = p[k] + step;
            let fp = field.value(&y);
            y[k] = p[k] - step;
            let fm = field.value(&y);
            let fd_grad = (fp - fm) / (2.0 * step);
            fd_lap += (fp - 2.0 * f0 + fm) / (step * step);
            if !((grad[k] - fd_grad).abs() <= rtol * grad[k].abs().max(1.0) + roundoff * step) {
                return Err(Error::Parameter(format!(
                    "gradient component {k} = {} disagrees with finite difference {fd_grad} at {p:?}",
                    grad[k]
                )));
            }
        }
        if !((lap - fd_lap).abs() <= rtol * lap.abs().max(1.0) + d as f64 * roundoff) {
            return Err(Error::Parameter(format!(
                "laplacian {lap} disagrees with finite difference {fd_lap} at {p:?}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_points(d: usize) -> Vec<Vec<f64>> {
        (0..20)
            .map(|i| (0..d).map(|k| ((i * 7 + k * 3) % 11) as f64 * 0.6 - 3.0).collect())
            .collect()
    }

    #[test]
    fn builtin_fields_match_finite_differences() {
        let fields: Vec<Field> = vec![
            Arc::new(GaussianLog::normalized(vec![-1.0, 0.5], vec![2.0, 0.7]).unwrap()),
            Arc::new(CauchyLog),
            Arc::new(ExpTailLog { beta: 1.5 }),
            Arc::new(Scaled {
                inner: Arc::new(GaussianLog::new(vec![2.0], vec![4.0], 0.0).unwrap()),
                factor: 0.5,
            }),
            Arc::new(Constant { dim: 3, c: 2.0 }),
        ];
        for f in &fields {
            check_derivatives(f.as_ref(), &sample_points(f.dim()), 1e-4, 1e-5).unwrap();
        }
    }

    #[test]
    fn wrong_user_derivative_is_caught() {
        let f = ExprField::parse("-x^2/2", &["-x".into()], "-1").unwrap();
        check_derivatives(&f, &sample_points(1), 1e-4, 1e-5).unwrap();
        let bad = ExprField::parse("-x^2/2", &["-2*x".into()], "-1").unwrap();
        assert!(check_derivatives(&bad, &sample_points(1), 1e-4, 1e-5).is_err());
    }

    #[test]
    fn gaussian_rejects_bad_variance() {
        assert!(GaussianLog::new(vec![0.0], vec![0.0], 0.0).is_err());
        assert!(GaussianLog::new(vec![0.0, 1.0], vec![1.0], 0.0).is_err());
    }
}
