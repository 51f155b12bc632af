//! The killing time `τ∂ = inf{t : ∫₀ᵗ κ(X_s) ds > ξ}` along discretized paths.
//!
//! The hazard integral is accumulated with the trapezoid rule on the path
//! grid and compared with a unit-exponential threshold `ξ` drawn once per
//! replica from the replica's killing stream. The crossing time is linearly
//! interpolated inside the step where it happens.

use rand::Rng;
use rand_distr::Exp1;

use crate::dynamics::{DriftField, PathGrid, SchemeConfig, Stepper, TimeGrid};
use crate::error::{Error, Result};
use crate::model::{KillingSpec, NEGATIVE_SLACK};
use crate::rng::RngStream;

/// A state-dependent hazard rate.
pub trait KillingRate: Sync {
    fn rate(&self, y: &[f64]) -> f64;

    /// Rates in `[−slack, 0)` are treated as zero rather than as violations.
    fn slack(&self) -> f64 {
        0.0
    }
}

impl KillingRate for KillingSpec {
    fn rate(&self, y: &[f64]) -> f64 {
        self.kappa(y)
    }
    fn slack(&self) -> f64 {
        NEGATIVE_SLACK * (1.0 + self.shift_k().abs())
    }
}

/// `κ ≡ c`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantRate(pub f64);

impl KillingRate for ConstantRate {
    fn rate(&self, _: &[f64]) -> f64 {
        self.0
    }
}

/// Adapter for closures.
pub struct RateFn<F>(pub F);

impl<F: Fn(&[f64]) -> f64 + Sync> KillingRate for RateFn<F> {
    fn rate(&self, y: &[f64]) -> f64 {
        (self.0)(y)
    }
}

/// `κ + δ` for a constant `δ`.
pub struct Shifted<'a, K: ?Sized> {
    pub inner: &'a K,
    pub delta: f64,
}

impl<K: KillingRate + ?Sized> KillingRate for Shifted<'_, K> {
    fn rate(&self, y: &[f64]) -> f64 {
        self.inner.rate(y) + self.delta
    }
    fn slack(&self) -> f64 {
        self.inner.slack()
    }
}

#[inline]
fn checked_rate(kappa: &(impl KillingRate + ?Sized), y: &[f64]) -> Result<f64> {
    let v = kappa.rate(y);
    if v >= 0.0 {
        Ok(v)
    } else if v >= -kappa.slack() {
        Ok(0.0)
    } else if v.is_nan() {
        Err(Error::eval("kappa", y))
    } else {
        Err(Error::NegativeRate {
            point: y.to_vec(),
            value: v,
        })
    }
}

/// Cumulative hazard at each grid time, trapezoid rule.
pub fn accumulate_hazard(path: &PathGrid, kappa: &(impl KillingRate + ?Sized)) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(path.len());
    let mut h = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (t, x) in path.times.iter().zip(&path.states) {
        let k = checked_rate(kappa, x)?;
        if let Some((t0, k0)) = prev {
            h += 0.5 * (k0 + k) * (t - t0);
        }
        out.push(h);
        prev = Some((*t, k));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KilledTrajectory {
    /// The path up to and including the grid time where the hazard crossed `xi`.
    pub path: PathGrid,
    pub killed: bool,
    pub tau: Option<f64>,
    pub hazard_trace: Vec<f64>,
    pub xi: f64,
}

/// How a single killed replica ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Fate {
    pub xi: f64,
    /// `(k, τ)`: killed in step `k−1 → k`, at time τ.
    pub death: Option<(usize, f64)>,
}

/// Steps one replica along `grid` until killed or at the horizon.
///
/// `visit(k, x)` sees every grid state at which the replica is still alive
/// (hazard strictly below `ξ`), starting with `k = 0`. With `on_death` the
/// state at the crossing step is passed too, for callers keeping the full path.
#[allow(clippy::too_many_arguments)]
pub(crate) fn drive_replica(
    stepper: &mut Stepper<'_>,
    kappa: &(impl KillingRate + ?Sized),
    x: &mut [f64],
    grid: &TimeGrid,
    rng: RngStream,
    mut visit: impl FnMut(usize, &[f64], f64),
    mut on_death: impl FnMut(usize, &[f64], f64),
) -> Result<Fate> {
    let xi: f64 = rng.killing_rng().sample(Exp1);
    let mut path_rng = rng.path_rng();
    let mut hazard = 0.0;
    let mut k_prev = checked_rate(kappa, x)?;
    visit(0, x, hazard);
    for k in 0..grid.steps {
        let h = grid.step_len(k);
        stepper.step(x, h, &mut path_rng)?;
        let k_next = checked_rate(kappa, x)?;
        let next = hazard + 0.5 * (k_prev + k_next) * h;
        if next >= xi {
            let frac = (xi - hazard) / (next - hazard);
            let tau = grid.time(k) + frac * h;
            on_death(k + 1, x, next);
            return Ok(Fate {
                xi,
                death: Some((k + 1, tau.min(grid.time(k + 1)))),
            });
        }
        hazard = next;
        k_prev = k_next;
        visit(k + 1, x, hazard);
    }
    Ok(Fate { xi, death: None })
}

pub fn simulate_killed(
    drift: &dyn DriftField,
    kappa: &(impl KillingRate + ?Sized),
    x0: &[f64],
    horizon: f64,
    cfg: &SchemeConfig,
    rng: RngStream,
) -> Result<KilledTrajectory> {
    if x0.len() != drift.dim() {
        return Err(Error::Parameter("x0 dimension does not match the drift".into()));
    }
    let grid = TimeGrid::new(cfg.dt, horizon)?;
    let mut stepper = Stepper::new(drift, cfg)?;
    let mut x = x0.to_vec();
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut hazard_trace = Vec::new();
    let mut tail = None;
    let fate = drive_replica(
        &mut stepper,
        kappa,
        &mut x,
        &grid,
        rng,
        |k, x, h| {
            times.push(grid.time(k));
            states.push(x.to_vec());
            hazard_trace.push(h);
        },
        |k, x, h| tail = Some((grid.time(k), x.to_vec(), h)),
    )?;
    if let Some((t, x, h)) = tail {
        times.push(t);
        states.push(x);
        hazard_trace.push(h);
    }
    Ok(KilledTrajectory {
        path: PathGrid { times, states },
        killed: fate.death.is_some(),
        tau: fate.death.map(|(_, tau)| tau),
        hazard_trace,
        xi: fate.xi,
    })
}

/// An exact `Exp(c)` draw.
pub fn killing_time_oracle_constant<R: Rng + ?Sized>(c: f64, rng: &mut R) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Parameter(format!("rate must be positive, got {c}")));
    }
    let e: f64 = rng.sample(Exp1);
    Ok(e / c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ZeroDrift;

    fn path(times: &[f64], xs: &[f64]) -> PathGrid {
        PathGrid {
            times: times.to_vec(),
            states: xs.iter().map(|x| vec![*x]).collect(),
        }
    }

    #[test]
    fn hazard_hand_values() {
        let p = path(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]);
        let h = accumulate_hazard(&p, &RateFn(|y: &[f64]| y[0] * y[0])).unwrap();
        assert_eq!(h, vec![0.0, 0.5, 3.0]);
        let h = accumulate_hazard(&p, &ConstantRate(0.0)).unwrap();
        assert_eq!(h, vec![0.0; 3]);
        let p = path(&[0.0, 0.5, 1.25, 3.0], &[4.0, -1.0, 2.0, 0.0]);
        let h = accumulate_hazard(&p, &ConstantRate(1.5)).unwrap();
        assert_eq!(*h.last().unwrap(), 4.5);
    }

    #[test]
    fn negative_rate_is_a_contract_violation() {
        let p = path(&[0.0, 1.0], &[0.0, 3.0]);
        let err = accumulate_hazard(&p, &RateFn(|y: &[f64]| 1.0 - y[0])).unwrap_err();
        assert!(matches!(err, Error::NegativeRate { ref point, .. } if point == &vec![3.0]));
    }

    #[test]
    fn unkilled_replica_reaches_horizon() {
        let cfg = SchemeConfig::euler(0.1);
        let tr = simulate_killed(&ZeroDrift { dim: 1 }, &ConstantRate(0.0), &[0.0], 5.0, &cfg, RngStream::new(1, 0))
            .unwrap();
        assert!(!tr.killed && tr.tau.is_none());
        assert_eq!(tr.path.len(), 51);
        assert_eq!(*tr.path.times.last().unwrap(), 5.0);
        assert!(tr.hazard_trace.iter().all(|h| *h == 0.0));
    }

    #[test]
    fn killed_trajectory_invariants() {
        let cfg = SchemeConfig::euler(0.05);
        let kappa = RateFn(|y: &[f64]| 0.5 * y[0] * y[0] + 0.2);
        for s in 0..200 {
            let tr = simulate_killed(&ZeroDrift { dim: 1 }, &kappa, &[1.0], 10.0, &cfg, RngStream::new(3, s)).unwrap();
            assert!(tr.hazard_trace.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(tr.hazard_trace[0], 0.0);
            assert_eq!(tr.hazard_trace.len(), tr.path.len());
            let last = *tr.hazard_trace.last().unwrap();
            if tr.killed {
                let n = tr.path.len();
                let tau = tr.tau.unwrap();
                assert!(last >= tr.xi);
                assert!(tau > tr.path.times[n - 2] && tau <= tr.path.times[n - 1]);
            } else {
                assert!(last < tr.xi);
                assert_eq!(*tr.path.times.last().unwrap(), 10.0);
            }
        }
    }

    #[test]
    fn exponential_oracle_rejects_nonpositive_rates() {
        let mut r = RngStream::new(0, 0).killing_rng();
        assert!(killing_time_oracle_constant(0.0, &mut r).is_err());
        assert!(killing_time_oracle_constant(2.0, &mut r).unwrap() > 0.0);
    }
}
