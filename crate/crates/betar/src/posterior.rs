//! Log-posterior of the coefficient vector, its analytic derivatives, and
//! the damped Newton recursion that tracks an approximate posterior mode
//! (with curvature) per visited dimension.
//!
//! The same cached modes drive both the within-model Metropolis proposals
//! and the trans-dimensional jump calibration, so the cache carries the
//! gradient and Hessian evaluated at the current estimate along with the
//! regularized negative-inverse-Hessian used as proposal covariance.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{in_simplex, log_likelihood_eval, SeriesData};
use crate::priors::AlphaPrior;
use crate::special::{digamma_pos, trigamma_pos};

/// Log-posterior of `alpha` given `phi`: log-likelihood plus log-prior,
/// equal to the exponential-family form up to a term constant in `alpha`.
/// Returns `-inf` outside the simplex (automatic rejection).
pub fn log_posterior_alpha(
    alpha: &[f64],
    phi: f64,
    data: &SeriesData,
    prior: &AlphaPrior,
) -> Result<f64> {
    Ok(log_posterior_eval(alpha, phi, data, prior)?.log_post)
}

pub struct PosteriorEval {
    pub log_post: f64,
    pub clamp_events: u64,
}

pub(crate) fn log_posterior_eval(
    alpha: &[f64],
    phi: f64,
    data: &SeriesData,
    prior: &AlphaPrior,
) -> Result<PosteriorEval> {
    if alpha.len() != prior.dim() {
        return Err(Error::Dimension { expected: prior.dim(), got: alpha.len() });
    }
    if !in_simplex(alpha) {
        return Ok(PosteriorEval { log_post: f64::NEG_INFINITY, clamp_events: 0 });
    }
    let lp = prior.log_density(alpha, phi);
    if lp == f64::NEG_INFINITY {
        return Ok(PosteriorEval { log_post: f64::NEG_INFINITY, clamp_events: 0 });
    }
    let lik = log_likelihood_eval(alpha, phi, data)?;
    Ok(PosteriorEval { log_post: lik.log_lik + lp, clamp_events: lik.clamp_events })
}

/// Gradient of the log-posterior in `alpha`:
/// `sum_t (A_t - psi0(eta_t phi) + psi0((1-eta_t) phi)) phi z_t` plus the
/// prior gradient, with `z_t = (1, x_{t-1}, ..., x_{t-k})`.
pub fn grad_alpha(
    alpha: &[f64],
    phi: f64,
    data: &SeriesData,
    prior: &AlphaPrior,
) -> Result<DVector<f64>> {
    let mut grad = prior.grad_log_density(alpha, phi)?;
    accumulate_likelihood_grad(alpha, phi, data, &mut grad)?;
    Ok(grad)
}

/// Hessian of the log-posterior in `alpha`:
/// `-sum_t (psi1(eta_t phi) + psi1((1-eta_t) phi)) phi^2 z_t z_t'` plus the
/// prior Hessian.
pub fn hess_alpha(
    alpha: &[f64],
    phi: f64,
    data: &SeriesData,
    prior: &AlphaPrior,
) -> Result<DMatrix<f64>> {
    let mut hess = prior.hess_log_density(alpha, phi)?;
    accumulate_likelihood_hess(alpha, phi, data, &mut hess)?;
    Ok(hess)
}

/// Likelihood-only gradient, exposed for the jump-calibration checks.
pub fn grad_likelihood(alpha: &[f64], phi: f64, data: &SeriesData) -> Result<DVector<f64>> {
    let mut grad = DVector::zeros(alpha.len());
    accumulate_likelihood_grad(alpha, phi, data, &mut grad)?;
    Ok(grad)
}

/// Likelihood-only Hessian (negative semidefinite by construction).
pub fn hess_likelihood(alpha: &[f64], phi: f64, data: &SeriesData) -> Result<DMatrix<f64>> {
    let mut hess = DMatrix::zeros(alpha.len(), alpha.len());
    accumulate_likelihood_hess(alpha, phi, data, &mut hess)?;
    Ok(hess)
}

fn window_check(alpha: &[f64], data: &SeriesData) -> Result<usize> {
    let k = alpha.len() - 1;
    if k > data.k_max() {
        return Err(Error::Config(format!("order {k} exceeds k_max = {}", data.k_max())));
    }
    Ok(k)
}

fn accumulate_likelihood_grad(
    alpha: &[f64],
    phi: f64,
    data: &SeriesData,
    grad: &mut DVector<f64>,
) -> Result<()> {
    let k = window_check(alpha, data)?;
    let values = data.values();
    for t in data.model_start()..values.len() {
        let x = values[t];
        let mut eta = alpha[0];
        for j in 1..=k {
            eta += alpha[j] * values[t - j];
        }
        let a_t = (x / (1.0 - x)).ln();
        let w = (a_t - digamma_pos(eta * phi) + digamma_pos((1.0 - eta) * phi)) * phi;
        grad[0] += w;
        for j in 1..=k {
            grad[j] += w * values[t - j];
        }
    }
    Ok(())
}

fn accumulate_likelihood_hess(
    alpha: &[f64],
    phi: f64,
    data: &SeriesData,
    hess: &mut DMatrix<f64>,
) -> Result<()> {
    let k = window_check(alpha, data)?;
    let values = data.values();
    let mut z = vec![1.0; k + 1];
    for t in data.model_start()..values.len() {
        let mut eta = alpha[0];
        for j in 1..=k {
            z[j] = values[t - j];
            eta += alpha[j] * z[j];
        }
        let w = (trigamma_pos(eta * phi) + trigamma_pos((1.0 - eta) * phi)) * phi * phi;
        for i in 0..=k {
            for j in i..=k {
                let v = -w * z[i] * z[j];
                hess[(i, j)] += v;
                if i != j {
                    hess[(j, i)] += v;
                }
            }
        }
    }
    Ok(())
}

/// Mode estimate and curvature for one dimension.
#[derive(Debug, Clone)]
pub struct ModeEntry {
    /// Current mode estimate, strictly inside the simplex.
    pub u: DVector<f64>,
    /// Gradient of the log-posterior at `u` (at `phi_tag`).
    pub grad: DVector<f64>,
    /// Hessian of the log-posterior at `u` (at `phi_tag`).
    pub hess: DMatrix<f64>,
    /// Regularized `-hess^{-1}`, symmetric positive definite.
    pub sigma: DMatrix<f64>,
    /// `sigma` from before the most recent Newton step; the within-model
    /// proposal covariance lags the mean by one step.
    pub sigma_prev: DMatrix<f64>,
    /// Precision at which `grad`/`hess`/`sigma` were evaluated.
    pub phi_tag: f64,
    /// Newton steps taken in this dimension.
    pub newton_steps: u64,
}

/// Per-dimension map of mode estimates; owned by a single chain.
#[derive(Debug, Clone, Default)]
pub struct ModeCache {
    entries: BTreeMap<usize, ModeEntry>,
    /// Instrumentation: posterior gradient/Hessian evaluation counts, used
    /// by tests asserting that mode estimates are reused, not recomputed.
    pub grad_evals: u64,
    pub hess_evals: u64,
}

/// Ridge trigger: smallest admissible eigenvalue of the negative Hessian.
const MIN_EIGENVALUE: f64 = 1e-8;
const MAX_HALVINGS: u32 = 30;

impl ModeCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entry(&self, k: usize) -> Option<&ModeEntry> {
        self.entries.get(&k)
    }

    pub fn visited_dims(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    /// Initialize the entry for order `k` (starting from the prior mean
    /// projected into the simplex) and run `warmup` damped Newton steps.
    /// No-op when the entry already exists.
    pub fn ensure(
        &mut self,
        k: usize,
        phi: f64,
        data: &SeriesData,
        prior: &AlphaPrior,
        warmup: usize,
    ) -> Result<()> {
        if !self.entries.contains_key(&k) {
            let u = DVector::from_vec(prior.interior_start());
            let (grad, hess, sigma) = self.eval_curvature(u.as_slice(), phi, data, prior)?;
            self.entries.insert(
                k,
                ModeEntry {
                    u,
                    grad,
                    hess,
                    sigma: sigma.clone(),
                    sigma_prev: sigma,
                    phi_tag: phi,
                    newton_steps: 0,
                },
            );
            for _ in 0..warmup {
                self.newton_step(k, phi, data, prior)?;
            }
        }
        Ok(())
    }

    /// One damped Newton step `u <- u + Sigma * grad`, halving the step until
    /// the candidate stays strictly inside the simplex and the log-posterior
    /// does not decrease. Refreshes the stored gradient, Hessian, and
    /// covariance at the new estimate; the previous covariance is retained
    /// for the lagged proposal.
    pub fn newton_step(
        &mut self,
        k: usize,
        phi: f64,
        data: &SeriesData,
        prior: &AlphaPrior,
    ) -> Result<()> {
        let entry = self
            .entries
            .get(&k)
            .ok_or_else(|| Error::Config(format!("mode cache has no entry for order {k}")))?;
        let u = entry.u.clone();
        let sigma_old = entry.sigma.clone();

        // derivatives at the current estimate under the current phi
        let (grad, _, sigma) = self.eval_curvature(u.as_slice(), phi, data, prior)?;
        let direction = &sigma * &grad;

        let lp0 = log_posterior_alpha(u.as_slice(), phi, data, prior)?;
        let mut chosen = u.clone();
        let mut step = 1.0;
        for _ in 0..=MAX_HALVINGS {
            let cand = &u + &direction * step;
            if in_simplex(cand.as_slice()) {
                let lp = log_posterior_alpha(cand.as_slice(), phi, data, prior)?;
                if lp >= lp0 {
                    chosen = cand;
                    break;
                }
            }
            step *= 0.5;
        }

        let (grad_new, hess_new, sigma_new) =
            self.eval_curvature(chosen.as_slice(), phi, data, prior)?;
        let entry = self.entries.get_mut(&k).expect("entry exists");
        entry.u = chosen;
        entry.grad = grad_new;
        entry.hess = hess_new;
        entry.sigma_prev = sigma_old;
        entry.sigma = sigma_new;
        entry.phi_tag = phi;
        entry.newton_steps += 1;
        Ok(())
    }

    /// Re-evaluate the stored derivatives at the current estimate if the
    /// precision has moved since they were computed; the estimate itself
    /// does not change.
    pub fn refresh(
        &mut self,
        k: usize,
        phi: f64,
        data: &SeriesData,
        prior: &AlphaPrior,
    ) -> Result<()> {
        let entry = self
            .entries
            .get(&k)
            .ok_or_else(|| Error::Config(format!("mode cache has no entry for order {k}")))?;
        if entry.phi_tag == phi {
            return Ok(());
        }
        let u = entry.u.clone();
        let (grad, hess, sigma) = self.eval_curvature(u.as_slice(), phi, data, prior)?;
        let entry = self.entries.get_mut(&k).expect("entry exists");
        entry.grad = grad;
        entry.hess = hess;
        entry.sigma = sigma;
        entry.phi_tag = phi;
        Ok(())
    }

    fn eval_curvature(
        &mut self,
        alpha: &[f64],
        phi: f64,
        data: &SeriesData,
        prior: &AlphaPrior,
    ) -> Result<(DVector<f64>, DMatrix<f64>, DMatrix<f64>)> {
        let grad = grad_alpha(alpha, phi, data, prior)?;
        let hess = hess_alpha(alpha, phi, data, prior)?;
        self.grad_evals += 1;
        self.hess_evals += 1;
        let sigma = regularized_neg_inverse(&hess);
        Ok((grad, hess, sigma))
    }
}

/// Invert `-hess`, adding a ridge when its smallest eigenvalue falls below
/// the threshold so the result is always symmetric positive definite.
pub(crate) fn regularized_neg_inverse(hess: &DMatrix<f64>) -> DMatrix<f64> {
    let n = hess.nrows();
    let mut neg = -hess.clone();
    let min_eig = neg
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_eig < MIN_EIGENVALUE {
        let h_norm = (0..n)
            .map(|i| (0..n).map(|j| hess[(i, j)].abs()).sum::<f64>())
            .fold(0.0f64, f64::max);
        // the stated ridge, escalated so positive definiteness holds even
        // when the Hessian turns indefinite near the simplex boundary
        let tau = (1e-6 * h_norm.max(1.0)).max(MIN_EIGENVALUE - min_eig.min(0.0));
        for i in 0..n {
            neg[(i, i)] += tau;
        }
    }
    let mut ridge_extra = 0.0;
    loop {
        let mut attempt = neg.clone();
        if ridge_extra > 0.0 {
            for i in 0..n {
                attempt[(i, i)] += ridge_extra;
            }
        }
        if let Some(chol) = attempt.cholesky() {
            let inv = chol.inverse();
            // exact symmetry for downstream Cholesky factorizations
            return 0.5 * (&inv + inv.transpose());
        }
        ridge_extra = if ridge_extra == 0.0 { MIN_EIGENVALUE } else { ridge_extra * 10.0 };
        assert!(ridge_extra < 1e12, "could not regularize Hessian");
    }
}
