//! Upper bound on the ergodic capacity of the temperature channel.
//!
//! For a fixed block the bound is
//!
//! ```text
//! 1/2 log2(prod_i s_ii / det S) + 1/N sum_i rbar(E / sqrt(s_ii))
//! ```
//!
//! with `S = (A^T A)^-1`, whose diagonal equals the squared row norms of
//! `B = A^-1`. `rbar(a)` bounds the capacity of a scalar nonnegative-input
//! Gaussian channel with amplitude gain `a` and noise deviation `sigma`; it
//! has two free parameters `gamma > 0`, `delta >= 0` that only affect how
//! tight it is. Everything here is evaluated in nats and converted to bits
//! at the end; [`LogBase::AsPrinted`] instead evaluates the entropy terms
//! and `delta` with base-2 logarithms, which mixes units and is kept for
//! comparison only.

use std::f64::consts::{E, LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::channel::{log_det_ratio_closed, sample_rayleigh_gains, ChannelRealization, ThermalParams};
use crate::error::{invalid, Result};
use crate::montecarlo::{run_trials, ErgodicEstimate};
use crate::quadrature::{minimize_2d, SearchBox};
use crate::rates::RateConfig;
use crate::specfun::{q_function, q_function_scaled};

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Relative step tolerance handed to the minimizer.
const MINIMIZER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub gamma: f64,
    pub delta: f64,
}

impl BoundParams {
    pub fn new(gamma: f64, delta: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(invalid("gamma", gamma, "must be finite and > 0"));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(invalid("delta", delta, "must be finite and >= 0"));
        }
        Ok(Self { gamma, delta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LogBase {
    #[default]
    #[serde(rename = "nat")]
    Nat,
    #[serde(rename = "as-printed")]
    AsPrinted,
}

/// How `(gamma, delta)` are chosen for each component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Tuning {
    /// Closed-form suboptimal choice.
    #[default]
    #[serde(rename = "sub", alias = "suboptimal")]
    Suboptimal,
    /// Grid search plus local refinement around the suboptimal point.
    #[serde(rename = "min", alias = "minimized")]
    Minimized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BoundSettings {
    pub tuning: Tuning,
    pub log_base: LogBase,
}

/// The terms of `rbar` with the two logarithms left to the caller.
struct Terms {
    /// Argument of the first logarithm.
    log_arg: f64,
    /// Sum of the non-logarithmic terms.
    rest: f64,
}

fn terms(amp: f64, sigma: f64, p: &BoundParams) -> Terms {
    let BoundParams { gamma, delta } = *p;
    let z = delta / sigma;
    let ed = (-0.5 * z * z).exp();
    let qd = q_function(z);
    let log_arg = gamma * ed + SQRT_2PI * sigma * qd;
    let rest = 0.5 * qd
        + delta * ed / (2.0 * SQRT_2PI * sigma)
        + 0.5 * z * z * (1.0 - q_function((delta + amp) / sigma))
        + (delta + amp + sigma * ed / SQRT_2PI) / gamma;
    Terms { log_arg, rest }
}

/// Scalar-channel capacity bound in nats for amplitude `amp = E / sqrt(s_ii)`
/// and noise deviation `sigma`.
pub fn r_bar(amp: f64, sigma: f64, p: &BoundParams) -> f64 {
    let t = terms(amp, sigma, p);
    t.log_arg.ln() + t.rest - 0.5 * (2.0 * PI * E * sigma * sigma).ln()
}

/// The same expression with base-2 logarithms in the two entropy terms.
/// Not a valid bound in any single unit.
pub fn r_bar_as_printed(amp: f64, sigma: f64, p: &BoundParams) -> f64 {
    let t = terms(amp, sigma, p);
    t.log_arg.log2() + t.rest - 0.5 * (2.0 * PI * E * sigma * sigma).log2()
}

/// `rbar` in bits under the chosen log convention.
pub fn r_bar_bits(amp: f64, sigma: f64, p: &BoundParams, base: LogBase) -> f64 {
    match base {
        LogBase::Nat => r_bar(amp, sigma, p) / LN_2,
        LogBase::AsPrinted => r_bar_as_printed(amp, sigma, p),
    }
}

/// Closed-form `(gamma, delta)`: `delta = sigma ln(1 + amp / sigma)` and
/// `gamma` the positive root that balances the `1/gamma` term.
pub fn suboptimal_params(amp: f64, sigma: f64) -> BoundParams {
    suboptimal_params_with_base(amp, sigma, LogBase::Nat)
}

pub fn suboptimal_params_with_base(amp: f64, sigma: f64, base: LogBase) -> BoundParams {
    let ratio = amp / sigma;
    let delta = match base {
        LogBase::Nat => sigma * ratio.ln_1p(),
        LogBase::AsPrinted => sigma * ratio.ln_1p() / LN_2,
    };
    let z = delta / sigma;
    let m = delta + amp + sigma * (-0.5 * z * z).exp() / SQRT_2PI;
    // exp(z^2/2) Q(z) evaluated without overflow.
    let disc = m * m + 4.0 * m * SQRT_2PI * sigma * q_function_scaled(z);
    BoundParams {
        gamma: 0.5 * m + 0.5 * disc.sqrt(),
        delta,
    }
}

/// Search region around the suboptimal point: `gamma` in
/// `[1e-3 g, 10 g]`, `delta` in `[0, 10 d + 1]`.
pub fn search_box(sub: &BoundParams) -> SearchBox {
    SearchBox {
        x: (1e-3 * sub.gamma, 10.0 * sub.gamma),
        y: (0.0, 10.0 * sub.delta + 1.0),
    }
}

/// Numerically minimized `(gamma, delta)` and the resulting `rbar` in bits.
/// Never worse than the suboptimal point, which seeds the search.
pub fn minimized_params(amp: f64, sigma: f64, base: LogBase) -> (BoundParams, f64) {
    let sub = suboptimal_params_with_base(amp, sigma, base);
    let region = search_box(&sub);
    let m = minimize_2d(
        |gamma, delta| r_bar_bits(amp, sigma, &BoundParams { gamma, delta }, base),
        &region,
        MINIMIZER_TOL,
        Some((sub.gamma, sub.delta)),
    );
    (
        BoundParams {
            gamma: m.point.0,
            delta: m.point.1,
        },
        m.value,
    )
}

/// `rbar` in bits for one component under the chosen tuning.
pub fn component_bound_bits(amp: f64, sigma: f64, settings: &BoundSettings) -> f64 {
    match settings.tuning {
        Tuning::Suboptimal => {
            let p = suboptimal_params_with_base(amp, sigma, settings.log_base);
            r_bar_bits(amp, sigma, &p, settings.log_base)
        }
        Tuning::Minimized => minimized_params(amp, sigma, settings.log_base).1,
    }
}

/// `E / sqrt(s_ii)` for each channel use, from the closed-form row norms.
pub fn effective_amplitudes(params: &ThermalParams, realization: &ChannelRealization, mean_power: f64) -> Vec<f64> {
    let memory_sqrt = params.memory_factor().sqrt();
    realization
        .gains()
        .iter()
        .enumerate()
        .map(|(i, &h)| {
            let amp = params.alpha * h * mean_power;
            if i == 0 {
                amp
            } else {
                amp / memory_sqrt
            }
        })
        .collect()
}

/// Capacity bound of one block, in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockBound {
    /// Log-determinant term without the `1/N` factor.
    pub unscaled: f64,
    /// Log-determinant term divided by `N`.
    pub per_use: f64,
}

pub fn block_bound(
    params: &ThermalParams,
    realization: &ChannelRealization,
    cfg: &RateConfig,
    settings: &BoundSettings,
) -> BlockBound {
    let n = realization.len();
    let sigma = cfg.sigma2.sqrt();
    let log_det = log_det_ratio_closed(n, params.beta);
    let components: f64 = effective_amplitudes(params, realization, cfg.mean_power)
        .into_iter()
        .map(|a| component_bound_bits(a, sigma, settings))
        .sum::<f64>()
        / n as f64;
    BlockBound {
        unscaled: log_det + components,
        per_use: log_det / n as f64 + components,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityBound {
    pub unscaled: ErgodicEstimate,
    pub per_use: ErgodicEstimate,
}

/// Ergodic bound in bits per channel use with the log-determinant term as
/// written (no `1/N`). Uses the same per-trial streams as
/// [`crate::rates::ergodic_rate`], so equal seeds give paired estimates.
pub fn ergodic_capacity_bound(
    params: &ThermalParams,
    cfg: &RateConfig,
    trials: u64,
    seed: u64,
    settings: &BoundSettings,
) -> Result<ErgodicEstimate> {
    Ok(ergodic_capacity_bound_detailed(params, cfg, trials, seed, settings)?.unscaled)
}

/// Both scalings of the ergodic bound from one set of realizations.
pub fn ergodic_capacity_bound_detailed(
    params: &ThermalParams,
    cfg: &RateConfig,
    trials: u64,
    seed: u64,
    settings: &BoundSettings,
) -> Result<CapacityBound> {
    params.validate()?;
    cfg.validate()?;
    let n = cfg.n;
    let unscaled = run_trials(trials, seed, |stream| {
        let real = sample_rayleigh_gains(n, stream).expect("n >= 1 checked above");
        block_bound(params, &real, cfg, settings).unscaled
    })?;
    // The two scalings differ by a deterministic constant per block.
    let shift = log_det_ratio_closed(n, params.beta) * (1.0 - 1.0 / n as f64);
    let per_use: Vec<f64> = unscaled.iter().map(|v| v - shift).collect();
    Ok(CapacityBound {
        unscaled: ErgodicEstimate::from_samples(&unscaled),
        per_use: ErgodicEstimate::from_samples(&per_use),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::InputDistribution;
    use crate::montecarlo::RngStream;
    use crate::rates::rate_ci_explicit;

    #[test]
    fn zero_amplitude_suboptimal_value() {
        let p = suboptimal_params(0.0, 1.0);
        assert_eq!(p.delta, 0.0);
        // 30-digit reference values
        assert!((p.gamma - 0.934_174_301_874_173_3).abs() < 1e-14, "{}", p.gamma);
        let r = r_bar(0.0, 1.0, &p);
        assert!((r - 0.040_868_887_469_538_27).abs() < 1e-14, "{r}");
    }

    #[test]
    fn delta_zero_simplification() {
        // With delta = 0 the two delta terms vanish and Q(0) = 1/2.
        let p = BoundParams::new(1.7, 0.0).unwrap();
        let a = 3.0;
        let expected = (1.7 + SQRT_2PI * 0.5).ln() + 0.25 + (a + 1.0 / SQRT_2PI) / 1.7 - 0.5 * (2.0 * PI * E).ln();
        assert!((r_bar(a, 1.0, &p) - expected).abs() < 1e-14);
    }

    #[test]
    fn natural_log_delta() {
        let p = suboptimal_params(E - 1.0, 1.0);
        assert!((p.delta - 1.0).abs() < 1e-15);
        let printed = suboptimal_params_with_base(1.0, 1.0, LogBase::AsPrinted);
        assert!((printed.delta - 1.0).abs() < 1e-15);
    }

    #[test]
    fn high_snr_tracks_log_amplitude() {
        let a = 1e3;
        let r = r_bar(a, 1.0, &suboptimal_params(a, 1.0));
        // Asymptotic capacity ln(a) + 1/2 ln(e / (2 pi)).
        let trend = a.ln() + 0.5 * (E / (2.0 * PI)).ln();
        assert!(r - trend >= 0.0 && r - trend <= 0.2, "gap {}", r - trend);
    }

    #[test]
    fn gamma_is_positive() {
        for &a in &[0.0, 1e-6, 0.3, 1.0, 10.0, 1e4, 1e8] {
            for &s in &[0.1, 1.0, 7.0] {
                assert!(suboptimal_params(a, s).gamma > 0.0);
                assert!(suboptimal_params_with_base(a, s, LogBase::AsPrinted).gamma > 0.0);
            }
        }
    }

    #[test]
    fn minimized_never_worse_than_suboptimal() {
        for &a in &[0.0, 0.5, 10.0, 300.0] {
            for base in [LogBase::Nat, LogBase::AsPrinted] {
                let sub = suboptimal_params_with_base(a, 1.0, base);
                let sub_value = r_bar_bits(a, 1.0, &sub, base);
                let (_, min_value) = minimized_params(a, 1.0, base);
                assert!(min_value <= sub_value, "a = {a}");
            }
        }
    }

    #[test]
    fn minimized_at_ten_beats_center_and_suboptimal() {
        let sub = suboptimal_params(10.0, 1.0);
        let region = search_box(&sub);
        let (p, v) = minimized_params(10.0, 1.0, LogBase::Nat);
        let (cg, cd) = region.center();
        assert!(v <= r_bar_bits(10.0, 1.0, &BoundParams { gamma: cg, delta: cd }, LogBase::Nat));
        assert!(v <= r_bar_bits(10.0, 1.0, &sub, LogBase::Nat));
        assert!(p.gamma > 0.0 && p.delta >= 0.0);
    }

    #[test]
    fn scalar_channel_has_no_log_det_term() {
        let params = ThermalParams::default();
        let real = ChannelRealization::new(vec![1.4]).unwrap();
        let cfg = RateConfig::new(20.0, 1.0, 1).unwrap();
        let settings = BoundSettings::default();
        let b = block_bound(&params, &real, &cfg, &settings);
        let a = params.alpha * 1.4 * 20.0;
        let expected = r_bar(a, 1.0, &suboptimal_params(a, 1.0)) / LN_2;
        assert!((b.unscaled - expected).abs() < 1e-14);
        assert_eq!(b.unscaled, b.per_use);
    }

    #[test]
    fn bound_dominates_achievable_rate_per_block() {
        let params = ThermalParams::default();
        let settings = BoundSettings::default();
        for t in 0..200 {
            let mut stream = RngStream::new(3, t);
            let real = sample_rayleigh_gains(4, &mut stream).unwrap();
            for &e in &[0.1, 1.0, 10.0, 100.0, 1e4] {
                let cfg = RateConfig::new(e, 1.0, 4).unwrap();
                let b = block_bound(&params, &real, &cfg, &settings);
                let r = rate_ci_explicit(InputDistribution::Exponential, &params, &real, &cfg);
                assert!(b.per_use >= r, "trial {t}, E = {e}");
                assert!(b.unscaled >= b.per_use);
            }
        }
    }

    #[test]
    fn ergodic_minimized_not_above_suboptimal() {
        let params = ThermalParams::default();
        let cfg = RateConfig::new(10.0, 1.0, 4).unwrap();
        let sub = ergodic_capacity_bound(&params, &cfg, 20, 5, &BoundSettings::default()).unwrap();
        let min = ergodic_capacity_bound(
            &params,
            &cfg,
            20,
            5,
            &BoundSettings {
                tuning: Tuning::Minimized,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(min.mean <= sub.mean);
    }

    #[test]
    fn detailed_scalings_differ_by_log_det_share() {
        let params = ThermalParams::default();
        let cfg = RateConfig::new(10.0, 1.0, 6).unwrap();
        let b = ergodic_capacity_bound_detailed(&params, &cfg, 100, 8, &BoundSettings::default()).unwrap();
        let shift = log_det_ratio_closed(6, params.beta) * 5.0 / 6.0;
        assert!((b.unscaled.mean - b.per_use.mean - shift).abs() < 1e-12);
    }

    #[test]
    fn param_validation() {
        assert!(BoundParams::new(0.0, 1.0).is_err());
        assert!(BoundParams::new(1.0, -1.0).is_err());
        assert!(BoundParams::new(1.0, 0.0).is_ok());
    }
}
