//! Bayesian inference for Beta autoregressive processes on (0,1)-valued
//! time series.
//!
//! A BAR(k) process draws each observation from a Beta distribution in the
//! location/precision parametrization, `x_t ~ Be(eta_t * phi, (1 - eta_t) * phi)`,
//! where the conditional mean `eta_t` is a convex-constrained linear
//! combination of a constant and the k most recent observations. The crate
//! provides:
//!
//! * the process itself: simulation, likelihood, and the reciprocal-root /
//!   coefficient correspondence ([`model`]);
//! * three simplex-constrained prior families for the coefficients with
//!   analytic gradients and Hessians ([`priors`]);
//! * posterior evaluation and a damped Newton recursion that tracks the
//!   posterior mode per dimension ([`posterior`]);
//! * a Metropolis-Hastings-within-Gibbs sampler at fixed order ([`gibbs`]);
//! * two reversible-jump samplers for model order selection ([`rjmcmc`]);
//! * chain-quality diagnostics: ESS, batched KS convergence checks, RMSE,
//!   acceptance rates ([`diagnostics`]).
//!
//! Everything is deterministic under a fixed seed; samplers take explicit
//! RNG state and never touch global entropy.

pub mod diagnostics;
pub mod error;
pub mod gibbs;
pub mod model;
pub mod posterior;
pub mod priors;
pub mod rjmcmc;
pub mod special;

pub use error::{Error, Result};

pub use model::{BarParams, SeriesData};
pub use priors::{AlphaPrior, PhiPrior, PriorSpec, RootPrior};

