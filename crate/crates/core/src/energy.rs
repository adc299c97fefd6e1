//! Average harvested energy under a piecewise-linear harvester.
//!
//! The received power is `P = h S` with unit-mean exponential `h` and input
//! power `S` of mean `E`. For exponential `S` its density is
//! `(2/E) K0(2 sqrt(x/E))`; for `S` uniform on `[0, 2E]` it is
//! `E1(x / 2E) / 2E`. Writing the average as
//! `eta [P_th G(P_th) + int_{P_th}^{P_sat} G(x) dx]`, with `G` the survival
//! function, gives the closed forms
//!
//! ```text
//! exp: eta [P_th u_t K1(u_t) + (E/2)(u_t^2 K2(u_t) - u_s^2 K2(u_s))],   u = 2 sqrt(P/E)
//! uni: eta P_sat e^-z_s - eta/(4E) [P_sat^2 G0(z_s) + P_th^2 G0(z_t)
//!                                   + 4E^2 (G2(z_s) - G2(z_t))],         z = P/(2E)
//! ```
//!
//! where `Gs(z) = Gamma(s, z)`. The first equals
//! `(2 eta / sqrt E)[P_th^(3/2) K1(u_t) + sqrt E (P_th K2(u_t) - P_sat K2(u_s))]`.
//! `average_harvested_uncorrected` keeps two variants found in circulation, an
//! extra `-sqrt(P_sat)(P_sat - 1) K1(u_s)` term in the exponential case and
//! `G0(z_t)` in place of the last `G2(z_t)` in the uniform case. Both
//! disagree with quadrature and exist only so the discrepancy can be
//! measured.

use serde::{Deserialize, Serialize};

use crate::channel::{draw_input_power, InputDistribution};
use crate::error::{invalid, Result};
use crate::montecarlo::{run_trials, ErgodicEstimate};
use crate::quadrature::{integrate, IntegrationResult};
use crate::specfun::{bessel_k, upper_incomplete_gamma};

/// Relative tolerance used when the caller does not pick one.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EhParams {
    pub eta: f64,
    /// Sensitivity threshold, mW.
    pub p_th: f64,
    /// Saturation power, mW. May be `+inf` for a linear harvester.
    pub p_sat: f64,
}

impl Default for EhParams {
    fn default() -> Self {
        Self {
            eta: 0.86,
            p_th: 0.5,
            p_sat: 1.5,
        }
    }
}

impl EhParams {
    pub fn new(eta: f64, p_th: f64, p_sat: f64) -> Result<Self> {
        let eh = Self { eta, p_th, p_sat };
        eh.validate()?;
        Ok(eh)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(invalid("eta", self.eta, "must lie in [0, 1]"));
        }
        if !(self.p_th >= 0.0 && self.p_th.is_finite()) {
            return Err(invalid("p_th", self.p_th, "must be finite and >= 0"));
        }
        if !(self.p_sat > self.p_th) {
            return Err(invalid("p_sat", self.p_sat, "must exceed p_th"));
        }
        Ok(())
    }

    /// Largest possible output, `eta * P_sat`.
    pub fn ceiling(&self) -> f64 {
        self.eta * self.p_sat
    }

    fn ceiling_or_zero(&self) -> f64 {
        if self.p_sat.is_finite() {
            self.ceiling()
        } else {
            0.0
        }
    }
}

/// Harvester output for received power `p`: zero up to and including
/// `P_th`, linear up to and including `P_sat`, then clamped.
pub fn harvest(p: f64, eh: &EhParams) -> Result<f64> {
    if !(p >= 0.0) {
        return Err(invalid("received power", p, "must be >= 0"));
    }
    Ok(harvest_unchecked(p, eh))
}

#[inline]
fn harvest_unchecked(p: f64, eh: &EhParams) -> f64 {
    if p <= eh.p_th {
        0.0
    } else if p <= eh.p_sat {
        eh.eta * p
    } else {
        eh.eta * eh.p_sat
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EhMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

impl EhMethod {
    pub fn name(&self) -> &'static str {
        match self {
            EhMethod::ClosedForm => "closed_form",
            EhMethod::Quadrature => "quadrature",
            EhMethod::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EhEstimate {
    /// mW per unit slot.
    pub value: f64,
    pub method: EhMethod,
    /// Zero for closed forms, the quadrature error estimate, or three
    /// standard errors for Monte Carlo.
    pub abs_error: f64,
}

fn check_mean(mean: f64, strict: bool) -> Result<()> {
    let ok = if strict { mean > 0.0 } else { mean >= 0.0 };
    if !(ok && mean.is_finite()) {
        return Err(invalid("mean power", mean, if strict { "must be finite and > 0" } else { "must be finite and >= 0" }));
    }
    Ok(())
}

/// Density of `P = h S` at `x > 0`.
pub fn received_power_pdf(dist: InputDistribution, mean: f64, x: f64) -> Result<f64> {
    check_mean(mean, true)?;
    if !(x > 0.0) {
        return Err(invalid("x", x, "density is evaluated for x > 0 only"));
    }
    match dist {
        InputDistribution::Exponential => Ok(2.0 / mean * bessel_k(0, 2.0 * (x / mean).sqrt())?),
        InputDistribution::Uniform => Ok(upper_incomplete_gamma(0.0, x / (2.0 * mean))? / (2.0 * mean)),
    }
}

/// The same density from its defining integral over the input power.
pub fn received_power_pdf_nested(dist: InputDistribution, mean: f64, x: f64, rel_tol: f64) -> Result<f64> {
    check_mean(mean, true)?;
    if !(x > 0.0) {
        return Err(invalid("x", x, "density is evaluated for x > 0 only"));
    }
    // exp(-x/s)/s tends to zero at s = 0, so the integrand is bounded there.
    let r = match dist {
        InputDistribution::Exponential => integrate(
            |s| if s > 0.0 { (-s / mean - x / s).exp() / (s * mean) } else { 0.0 },
            0.0,
            f64::INFINITY,
            rel_tol,
        )?,
        InputDistribution::Uniform => integrate(
            |s| if s > 0.0 { (-x / s).exp() / (2.0 * mean * s) } else { 0.0 },
            0.0,
            2.0 * mean,
            rel_tol,
        )?,
    };
    Ok(r.value)
}

/// `u K1(u)`, continuous at 0 with value 1.
fn u_k1(u: f64) -> Result<f64> {
    if u == 0.0 {
        Ok(1.0)
    } else if u.is_infinite() {
        Ok(0.0)
    } else {
        Ok(u * bessel_k(1, u)?)
    }
}

/// `u^2 K2(u)`, continuous at 0 with value 2.
fn u2_k2(u: f64) -> Result<f64> {
    if u == 0.0 {
        Ok(2.0)
    } else if u.is_infinite() {
        Ok(0.0)
    } else {
        Ok(u * u * bessel_k(2, u)?)
    }
}

/// `P^2 Gamma(0, P/2E)`, zero at both ends.
fn p2_g0(p: f64, z: f64) -> Result<f64> {
    if p == 0.0 || z.is_infinite() {
        Ok(0.0)
    } else {
        Ok(p * p * upper_incomplete_gamma(0.0, z)?)
    }
}

fn g2(z: f64) -> Result<f64> {
    if z == 0.0 {
        Ok(1.0)
    } else if z.is_infinite() {
        Ok(0.0)
    } else {
        upper_incomplete_gamma(2.0, z)
    }
}

fn closed_exponential(mean: f64, eh: &EhParams) -> Result<f64> {
    let ut = 2.0 * (eh.p_th / mean).sqrt();
    let us = 2.0 * (eh.p_sat / mean).sqrt();
    Ok(eh.eta * (eh.p_th * u_k1(ut)? + 0.5 * mean * (u2_k2(ut)? - u2_k2(us)?)))
}

fn closed_uniform(mean: f64, eh: &EhParams) -> Result<f64> {
    let zt = eh.p_th / (2.0 * mean);
    let zs = eh.p_sat / (2.0 * mean);
    let head = if eh.p_sat.is_infinite() {
        0.0
    } else {
        eh.p_sat * (-zs).exp()
    };
    let bracket = p2_g0(eh.p_sat, zs)? + p2_g0(eh.p_th, zt)? + 4.0 * mean * mean * (g2(zs)? - g2(zt)?);
    Ok(eh.eta * (head - bracket / (4.0 * mean)))
}

/// Closed-form average harvested power. `E = 0` gives exactly 0.
pub fn average_harvested_closed(dist: InputDistribution, mean: f64, eh: &EhParams) -> Result<EhEstimate> {
    check_mean(mean, false)?;
    eh.validate()?;
    let value = if mean == 0.0 || eh.eta == 0.0 {
        0.0
    } else {
        match dist {
            InputDistribution::Exponential => closed_exponential(mean, eh)?,
            InputDistribution::Uniform => closed_uniform(mean, eh)?,
        }
    };
    Ok(EhEstimate {
        value: value.clamp(0.0, eh.ceiling()),
        method: EhMethod::ClosedForm,
        abs_error: 0.0,
    })
}

/// The uncorrected variants described in the module docs, unclamped.
/// Requires `P_th > 0` and finite `P_sat`.
pub fn average_harvested_uncorrected(dist: InputDistribution, mean: f64, eh: &EhParams) -> Result<f64> {
    check_mean(mean, true)?;
    eh.validate()?;
    if !(eh.p_th > 0.0 && eh.p_sat.is_finite()) {
        return Err(invalid("p_th", eh.p_th, "uncorrected variants need 0 < p_th and finite p_sat"));
    }
    match dist {
        InputDistribution::Exponential => {
            let ut = 2.0 * (eh.p_th / mean).sqrt();
            let us = 2.0 * (eh.p_sat / mean).sqrt();
            let se = mean.sqrt();
            let bracket = eh.p_th.powf(1.5) * bessel_k(1, ut)?
                - eh.p_sat.sqrt() * (eh.p_sat - 1.0) * bessel_k(1, us)?
                + se * (eh.p_th * bessel_k(2, ut)? - eh.p_sat * bessel_k(2, us)?);
            Ok(2.0 * eh.eta / se * bracket)
        }
        InputDistribution::Uniform => {
            let zt = eh.p_th / (2.0 * mean);
            let zs = eh.p_sat / (2.0 * mean);
            let bracket = eh.p_sat * eh.p_sat * upper_incomplete_gamma(0.0, zs)?
                + eh.p_th * eh.p_th * upper_incomplete_gamma(0.0, zt)?
                + 4.0 * mean * mean * (upper_incomplete_gamma(2.0, zs)? - upper_incomplete_gamma(0.0, zt)?);
            Ok(eh.eta * eh.p_sat * (-zs).exp() - eh.eta / (4.0 * mean) * bracket)
        }
    }
}

/// Direct quadrature of the linear and saturated pieces against the density.
pub fn average_harvested_quadrature(
    dist: InputDistribution,
    mean: f64,
    eh: &EhParams,
    rel_tol: f64,
) -> Result<EhEstimate> {
    check_mean(mean, false)?;
    eh.validate()?;
    if mean == 0.0 || eh.eta == 0.0 {
        return Ok(EhEstimate {
            value: 0.0,
            method: EhMethod::Quadrature,
            abs_error: 0.0,
        });
    }
    // The log singularity of the density sits at x = 0, which is only an
    // endpoint here; open rules never evaluate it.
    let pdf = |x: f64| received_power_pdf(dist, mean, x).unwrap_or(0.0);
    let linear = integrate(|x| x * pdf(x), eh.p_th, eh.p_sat, rel_tol)?;
    let saturated = if eh.p_sat.is_finite() {
        integrate(pdf, eh.p_sat, f64::INFINITY, rel_tol)?
    } else {
        IntegrationResult {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 1,
        }
    };
    let value = eh.eta * linear.value + eh.ceiling_or_zero() * saturated.value;
    Ok(EhEstimate {
        value,
        method: EhMethod::Quadrature,
        abs_error: eh.eta * linear.abs_error_estimate + eh.ceiling_or_zero() * saturated.abs_error_estimate,
    })
}

/// Monte Carlo mean of `harvest(h S)`. Trial `t` draws `h` then `S` from
/// stream `(seed, t)`.
pub fn average_harvested_mc(
    dist: InputDistribution,
    mean: f64,
    eh: &EhParams,
    trials: u64,
    seed: u64,
) -> Result<EhEstimate> {
    check_mean(mean, false)?;
    eh.validate()?;
    let samples = run_trials(trials, seed, |stream| {
        let h = stream.exponential();
        let s = draw_input_power(dist, mean, stream);
        harvest_unchecked(h * s, eh)
    })?;
    let est = ErgodicEstimate::from_samples(&samples);
    Ok(EhEstimate {
        value: est.mean,
        method: EhMethod::MonteCarlo,
        abs_error: 3.0 * est.std_error,
    })
}
