//! The BAR(k) process: parameters under convexity constraints, conditional
//! mean, transition density, likelihood, simulation, and the reciprocal-root
//! correspondence between orders k and k+1.
//!
//! Conventions used throughout the crate:
//!
//! * A coefficient vector `alpha = (alpha_0, ..., alpha_k)` of length k+1
//!   holds the constant term first; it must lie in the open simplex
//!   `Delta_{k+1} = { alpha_i in (0,1), sum alpha_i in (0,1) }`.
//! * Lag windows are ordered most-recent-first: `lags[0] = x_{t-1}`.
//! * A series of length n with maximum admissible order `k_max` is modeled
//!   from 0-based index `k_max` on; earlier observations only condition.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::special::ln_beta_pos;

/// Margin used for strict simplex membership; keeps the log terms of the
/// priors and the likelihood finite.
pub const SIMPLEX_MARGIN: f64 = 1e-10;

/// Last-resort clamp for the conditional mean before density evaluation.
/// Clamp events are counted by the samplers; a run under the repulsive
/// prior is expected to report zero.
pub const ETA_CLAMP: f64 = 1e-8;

/// Strict membership in the open simplex with the numerical margin.
pub fn in_simplex(alpha: &[f64]) -> bool {
    if alpha.is_empty() {
        return false;
    }
    let mut sum = 0.0;
    for &a in alpha {
        if !(a > SIMPLEX_MARGIN) || !(a < 1.0 - SIMPLEX_MARGIN) {
            return false;
        }
        sum += a;
    }
    sum > SIMPLEX_MARGIN && sum < 1.0 - SIMPLEX_MARGIN
}

/// Model parameters: coefficient vector in the simplex plus positive precision.
#[derive(Debug, Clone, PartialEq)]
pub struct BarParams {
    alpha: Vec<f64>,
    phi: f64,
}

impl BarParams {
    pub fn new(alpha: Vec<f64>, phi: f64) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(Error::Config(format!(
                "BAR order must be at least 1 (got {} coefficients)",
                alpha.len()
            )));
        }
        if !in_simplex(&alpha) {
            return Err(Error::Domain(format!("coefficients {alpha:?} violate the convexity constraints")));
        }
        if !(phi > 0.0 && phi.is_finite()) {
            return Err(Error::Domain(format!("precision must be positive, got {phi}")));
        }
        Ok(Self { alpha, phi })
    }

    /// Autoregressive order k; the coefficient vector has k+1 entries.
    pub fn order(&self) -> usize {
        self.alpha.len() - 1
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Observations in (0,1) together with the windowing convention: the first
/// `k_max` values condition the likelihood but never contribute terms.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesData {
    values: Vec<f64>,
    k_max: usize,
}

impl SeriesData {
    /// Validates that every observation is strictly inside (0,1); offending
    /// 0-based row indices are reported together.
    pub fn new(values: Vec<f64>, k_max: usize) -> Result<Self> {
        let bad: Vec<usize> = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| !(v > 0.0 && v < 1.0 && v.is_finite()))
            .map(|(i, _)| i)
            .collect();
        if !bad.is_empty() {
            return Err(Error::SeriesDomain(bad));
        }
        if values.len() < k_max {
            return Err(Error::Config(format!(
                "series of length {} too short for k_max = {k_max}",
                values.len()
            )));
        }
        Ok(Self { values, k_max })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// 0-based index of the first modeled observation (= k_max; the 1-based
    /// convention t0 = k_max + 1).
    pub fn model_start(&self) -> usize {
        self.k_max
    }

    /// Number of observations that contribute likelihood terms.
    pub fn n_modeled(&self) -> usize {
        self.values.len() - self.k_max
    }

    /// The same observations re-windowed under a different maximum order.
    pub fn with_k_max(&self, k_max: usize) -> Result<Self> {
        Self::new(self.values.clone(), k_max)
    }
}

/// Conditional mean `eta_t = alpha_0 + sum_i alpha_i * lags[i-1]` with lags
/// ordered most-recent-first. Lies in `[alpha_0, sum alpha_i]`.
pub fn conditional_mean(alpha: &[f64], lags: &[f64]) -> Result<f64> {
    if lags.len() + 1 != alpha.len() {
        return Err(Error::Dimension { expected: alpha.len() - 1, got: lags.len() });
    }
    let mut eta = alpha[0];
    for (a, x) in alpha[1..].iter().zip(lags) {
        eta += a * x;
    }
    Ok(eta)
}

fn eta_unchecked(alpha: &[f64], values: &[f64], t: usize) -> f64 {
    let mut eta = alpha[0];
    for (j, a) in alpha[1..].iter().enumerate() {
        eta += a * values[t - 1 - j];
    }
    eta
}

/// Log of the Beta transition density in the location/precision
/// parametrization: `-ln B(eta*phi, (1-eta)*phi) + (eta*phi - 1) ln x
/// + ((1-eta)*phi - 1) ln(1-x)`.
pub fn transition_logpdf(x: f64, eta: f64, phi: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("observation {x} outside (0,1)")));
    }
    let a = eta * phi;
    let b = (1.0 - eta) * phi;
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!(
            "Beta shapes must be positive: eta*phi = {a}, (1-eta)*phi = {b}"
        )));
    }
    Ok(transition_logpdf_pos(x, a, b))
}

#[inline]
fn transition_logpdf_pos(x: f64, a: f64, b: f64) -> f64 {
    -ln_beta_pos(a, b) + (a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln()
}

/// Log-likelihood plus the number of conditional-mean clamp events.
pub struct LikelihoodEval {
    pub log_lik: f64,
    pub clamp_events: u64,
}

/// Approximated log-likelihood over the modeled window `t0..=T`.
///
/// Orders below `k_max` forget the first `k_max - k` observations, so
/// likelihoods of different orders are comparable on the same window. A
/// window with no modeled observations contributes no terms (an empty
/// product); the samplers require at least two modeled points.
pub fn log_likelihood(params: &BarParams, data: &SeriesData) -> Result<f64> {
    Ok(log_likelihood_eval(params.alpha(), params.phi(), data)?.log_lik)
}

/// As [`log_likelihood`] but on a raw coefficient slice and reporting clamps.
pub fn log_likelihood_eval(alpha: &[f64], phi: f64, data: &SeriesData) -> Result<LikelihoodEval> {
    let k = alpha.len() - 1;
    if k > data.k_max() {
        return Err(Error::Config(format!("order {k} exceeds k_max = {}", data.k_max())));
    }
    let values = data.values();
    let mut log_lik = 0.0;
    let mut clamp_events = 0;
    for t in data.model_start()..values.len() {
        let mut eta = eta_unchecked(alpha, values, t);
        if eta < ETA_CLAMP || eta > 1.0 - ETA_CLAMP {
            eta = eta.clamp(ETA_CLAMP, 1.0 - ETA_CLAMP);
            clamp_events += 1;
        }
        log_lik += transition_logpdf_pos(values[t], eta * phi, (1.0 - eta) * phi);
    }
    Ok(LikelihoodEval { log_lik, clamp_events })
}

/// Draw from Be(eta*phi, (1-eta)*phi) as a ratio of two gamma variates;
/// correct in the anti-unimodal shape-below-one regime as well.
pub(crate) fn draw_beta<R: Rng + ?Sized>(eta: f64, phi: f64, rng: &mut R) -> f64 {
    let g1 = Gamma::new(eta * phi, 1.0).expect("positive shape").sample(rng);
    let g2 = Gamma::new((1.0 - eta) * phi, 1.0).expect("positive shape").sample(rng);
    let x = g1 / (g1 + g2);
    // keep draws strictly inside (0,1) against underflow
    x.clamp(1e-12, 1.0 - 1e-12)
}

/// Simulate `n` observations given `init` starting values (most recent
/// last). The returned series contains the initial values as its
/// conditioning head, with `k_max = init.len()`.
pub fn simulate(params: &BarParams, n: usize, init: &[f64], seed: u64) -> Result<SeriesData> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_with_rng(params, n, init, &mut rng)
}

/// As [`simulate`] with caller-provided RNG state.
pub fn simulate_with_rng<R: Rng + ?Sized>(
    params: &BarParams,
    n: usize,
    init: &[f64],
    rng: &mut R,
) -> Result<SeriesData> {
    if n == 0 {
        return Err(Error::Config("simulation length must be at least 1".into()));
    }
    if init.len() < params.order() {
        return Err(Error::Config(format!(
            "need at least {} initial values for a BAR({}), got {}",
            params.order(),
            params.order(),
            init.len()
        )));
    }
    if init.iter().any(|&v| !(v > 0.0 && v < 1.0)) {
        return Err(Error::Domain("initial values must lie strictly inside (0,1)".into()));
    }
    let mut values = init.to_vec();
    values.reserve(n);
    for t in init.len()..init.len() + n {
        let eta = eta_unchecked(params.alpha(), &values, t);
        values.push(draw_beta(eta, params.phi(), rng));
    }
    SeriesData::new(values, init.len())
}

/// Mean fixed point `m = alpha_0 / (1 - sum_{j>=1} alpha_j)` of the
/// conditional-mean recursion; the stationary mean of the process.
pub fn stationary_mean(alpha: &[f64]) -> f64 {
    let lag_sum: f64 = alpha[1..].iter().sum();
    alpha[0] / (1.0 - lag_sum)
}

/// Extension of a coefficient vector by one reciprocal root.
#[derive(Debug, Clone, PartialEq)]
pub struct RootExtension {
    pub base: Vec<f64>,
    pub root: f64,
    pub extended: Vec<f64>,
}

impl RootExtension {
    pub fn new(base: &[f64], root: f64) -> Self {
        Self { base: base.to_vec(), root, extended: extend_by_root(base, root) }
    }

    /// Whether the extended coefficients satisfy the convexity constraints.
    pub fn admissible(&self) -> bool {
        in_simplex(&self.extended)
    }
}

/// Multiply the lag polynomial by `(1 - r L)`: the coefficient recursion
/// `a*_0 = a_0`, `a*_1 = a_1 + r`, `a*_j = a_j - r a_{j-1}` with `a_{k+1} = 0`.
pub fn extend_by_root(alpha: &[f64], r: f64) -> Vec<f64> {
    let k = alpha.len() - 1;
    let mut ext = Vec::with_capacity(k + 2);
    ext.push(alpha[0]);
    ext.push(alpha.get(1).copied().unwrap_or(0.0) + r);
    for j in 2..=k + 1 {
        ext.push(alpha.get(j).copied().unwrap_or(0.0) - r * alpha[j - 1]);
    }
    ext
}

/// Inverse of [`extend_by_root`]: divide the lag polynomial by `(1 - r L)`,
/// discarding the trailing coefficient.
pub fn contract_by_root(extended: &[f64], r: f64) -> Vec<f64> {
    debug_assert!(extended.len() >= 3);
    let k = extended.len() - 2;
    let mut base = Vec::with_capacity(k + 1);
    base.push(extended[0]);
    base.push(extended[1] - r);
    for j in 2..=k {
        let prev = base[j - 1];
        base.push(extended[j] + r * prev);
    }
    base
}

/// True iff extending `alpha` by root `r` lands inside the simplex.
/// Guaranteed for `-alpha_1 < r < 0`.
pub fn check_extension_admissible(alpha: &[f64], r: f64) -> bool {
    in_simplex(&extend_by_root(alpha, r))
}

/// Innovation process `xi_t = x_t - eta_t` over the modeled window.
pub fn innovation_sequence(alpha: &[f64], data: &SeriesData) -> Result<Vec<f64>> {
    innovations_from(alpha, data, data.model_start())
}

/// Innovations from an arbitrary start index; the trans-dimensional moves
/// need one lead term before the modeled window.
pub(crate) fn innovations_from(alpha: &[f64], data: &SeriesData, start: usize) -> Result<Vec<f64>> {
    let k = alpha.len() - 1;
    if k > data.k_max() {
        return Err(Error::Config(format!("order {k} exceeds k_max = {}", data.k_max())));
    }
    if start < k {
        return Err(Error::Config(format!(
            "innovations from index {start} need {k} preceding observations"
        )));
    }
    let values = data.values();
    Ok((start..values.len()).map(|t| values[t] - eta_unchecked(alpha, values, t)).collect())
}

/// Log odds `A = ln(x / (1-x))`, antisymmetric about one half.
pub fn log_odds(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("log_odds requires x in (0,1), got {x}")));
    }
    Ok((x / (1.0 - x)).ln())
}
