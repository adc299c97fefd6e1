//! Achievable rates of the temperature channel under channel inversion.
//!
//! Inverting `A` at the receiver leaves `N` parallel scalar intensity
//! channels `B y = S + B w`; channel `i` carries noise of variance
//! `sigma^2 ||b_i||^2`. With a mean-`E` input on each, the per-channel-use
//! rate is
//!
//! ```text
//! R = 1/(2N) sum_i log2(1 + c * E^2 / (sigma^2 ||b_i||^2))
//! ```
//!
//! with `c = e / (2 pi)` for exponential inputs and `c = 2 / (pi e)` for
//! uniform inputs on `[0, 2E]`.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::channel::{sample_rayleigh_gains, ChannelRealization, InputDistribution, TemperatureChannel, ThermalParams};
use crate::error::{invalid, Result};
use crate::montecarlo::{estimate, ErgodicEstimate};
use crate::quadrature::integrate;
use crate::specfun::log2_1p;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateConfig {
    /// Mean transmit power per channel use, mW.
    pub mean_power: f64,
    pub sigma2: f64,
    /// Channel uses per block.
    pub n: usize,
}

impl RateConfig {
    pub fn new(mean_power: f64, sigma2: f64, n: usize) -> Result<Self> {
        let cfg = Self { mean_power, sigma2, n };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean_power >= 0.0 && self.mean_power.is_finite()) {
            return Err(invalid("mean_power", self.mean_power, "must be finite and >= 0"));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(invalid("sigma2", self.sigma2, "must be finite and > 0"));
        }
        if self.n == 0 {
            return Err(invalid("n", 0.0, "need at least one channel use"));
        }
        Ok(())
    }
}

/// SNR scaling constant of the input distribution.
pub fn rate_coefficient(dist: InputDistribution) -> f64 {
    match dist {
        InputDistribution::Exponential => E / (2.0 * PI),
        InputDistribution::Uniform => 2.0 / (PI * E),
    }
}

/// Rate from the row norms of the explicit inverse, in bits per channel use.
pub fn rate_ci_generic(dist: InputDistribution, ch: &TemperatureChannel, cfg: &RateConfig) -> f64 {
    let c = rate_coefficient(dist);
    let e2 = cfg.mean_power * cfg.mean_power;
    let n = ch.n() as f64;
    ch.row_norm_sq()
        .iter()
        .map(|norm| log2_1p(c * e2 / (cfg.sigma2 * norm)))
        .sum::<f64>()
        / (2.0 * n)
}

/// Rate written directly in the thermal constants and fading gains. Total
/// in the gains: a zero gain simply contributes nothing.
pub fn rate_ci_explicit(
    dist: InputDistribution,
    params: &ThermalParams,
    realization: &ChannelRealization,
    cfg: &RateConfig,
) -> f64 {
    let h = realization.gains();
    rate_from_gains(dist, params.alpha, params.memory_factor(), h, cfg.mean_power, cfg.sigma2)
}

#[inline]
fn rate_from_gains(dist: InputDistribution, alpha: f64, memory: f64, h: &[f64], mean: f64, sigma2: f64) -> f64 {
    let c = rate_coefficient(dist);
    let scale = c * alpha * alpha * mean * mean / sigma2;
    let first = log2_1p(scale * h[0] * h[0]);
    let rest: f64 = h[1..].iter().map(|g| log2_1p(scale * g * g / memory)).sum();
    (first + rest) / (2.0 * h.len() as f64)
}

/// Monte Carlo average of [`rate_ci_explicit`] over i.i.d. Rayleigh blocks.
/// Trial `t` draws its `n` gains from stream `(seed, t)`.
pub fn ergodic_rate(
    dist: InputDistribution,
    params: &ThermalParams,
    cfg: &RateConfig,
    trials: u64,
    seed: u64,
) -> Result<ErgodicEstimate> {
    params.validate()?;
    cfg.validate()?;
    let memory = params.memory_factor();
    estimate(trials, seed, |stream| {
        let real = sample_rayleigh_gains(cfg.n, stream).expect("n >= 1 checked above");
        rate_from_gains(dist, params.alpha, memory, real.gains(), cfg.mean_power, cfg.sigma2)
    })
}

/// Exact ergodic rate by quadrature. The gains are i.i.d., so the block
/// average splits into `(1/2N)[f(k) + (N - 1) f(k / m)]` with
/// `f(k) = E log2(1 + k h^2)`, `k = c alpha^2 E^2 / sigma^2` and `m` the
/// memory factor.
pub fn ergodic_rate_quadrature(dist: InputDistribution, params: &ThermalParams, cfg: &RateConfig) -> Result<f64> {
    params.validate()?;
    cfg.validate()?;
    let k = rate_coefficient(dist) * (params.alpha * cfg.mean_power).powi(2) / cfg.sigma2;
    if k == 0.0 {
        return Ok(0.0);
    }
    let f = |k: f64| integrate(|h| log2_1p(k * h * h) * (-h).exp(), 0.0, f64::INFINITY, 1e-12).map(|r| r.value);
    let n = cfg.n as f64;
    let first = f(k)?;
    let rest = if cfg.n > 1 { f(k / params.memory_factor())? } else { 0.0 };
    Ok((first + (n - 1.0) * rest) / (2.0 * n))
}
