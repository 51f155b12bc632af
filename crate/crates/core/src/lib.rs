//! Quasi-stationary Monte Carlo for killed diffusions.
//!
//! Given a target density π and a gradient diffusion `dX = ∇A(X) dt + dW`,
//! this crate derives the killing rate κ that makes π the quasi-limiting law
//! of the killed process, simulates killed ensembles to estimate the
//! conditioned laws `P_x(X_t ∈ · | τ∂ > t)`, and checks convergence and rates
//! against closed-form and discretized-generator oracles.
//!
//! * [`model`]: κ̃, the shift `K`, and numerical assumption checks.
//! * [`dynamics`]: Euler–Maruyama and exact OU/Brownian transitions.
//! * [`killing`]: cumulative hazard and the killing time.
//! * [`ensemble`]: replica ensembles, conditioned laws and statistics.
//! * [`spectral`]: OU closed forms and the discretized killed generator.
//! * [`runner`]: the config-driven experiment runner behind the `qsmc` binary.

pub mod catalog;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod expr;
pub mod field;
pub mod killing;
pub mod model;
pub mod output;
pub mod quad;
pub mod rng;
pub mod runner;
pub mod spectral;

pub use catalog::Model;
pub use error::{Error, Result};
pub use rng::RngStream;
