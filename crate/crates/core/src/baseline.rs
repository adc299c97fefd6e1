//! Power-splitting receiver used as a reference point.
//!
//! A fraction `rho` of the received RF power goes to a Gaussian-input
//! decoder on a flat Rayleigh channel with AWGN of variance `sigma^2`; the
//! remaining `1 - rho` feeds the harvester. Transmit power is held at `E`
//! unless a random input is requested.

use serde::{Deserialize, Serialize};

use crate::channel::{draw_input_power, InputDistribution};
use crate::energy::{EhEstimate, EhMethod, EhParams};
use crate::error::{invalid, Result};
use crate::montecarlo::{estimate, run_trials, ErgodicEstimate};
use crate::specfun::log2_1p;

/// Transmit power seen by the harvester branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsInput {
    #[default]
    Constant,
    Random(InputDistribution),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsConfig {
    pub rho: f64,
    /// mW.
    pub mean_power: f64,
    pub sigma2: f64,
    #[serde(default)]
    pub input: PsInput,
}

impl PsConfig {
    pub fn new(rho: f64, mean_power: f64, sigma2: f64) -> Result<Self> {
        let cfg = Self {
            rho,
            mean_power,
            sigma2,
            input: PsInput::Constant,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(invalid("rho", self.rho, "must lie in [0, 1]"));
        }
        if !(self.mean_power >= 0.0 && self.mean_power.is_finite()) {
            return Err(invalid("mean_power", self.mean_power, "must be finite and >= 0"));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(invalid("sigma2", self.sigma2, "must be finite and > 0"));
        }
        Ok(())
    }
}

/// Ergodic `log2(1 + rho h E / sigma^2)` over unit-mean exponential `h`.
pub fn ps_rate(cfg: &PsConfig, trials: u64, seed: u64) -> Result<ErgodicEstimate> {
    cfg.validate()?;
    let snr = cfg.rho * cfg.mean_power / cfg.sigma2;
    estimate(trials, seed, |stream| log2_1p(snr * stream.exponential()))
}

/// Monte Carlo mean of `harvest((1 - rho) h S)`; `abs_error` is three
/// standard errors.
pub fn ps_energy(cfg: &PsConfig, eh: &EhParams, trials: u64, seed: u64) -> Result<EhEstimate> {
    cfg.validate()?;
    eh.validate()?;
    let split = 1.0 - cfg.rho;
    let samples = run_trials(trials, seed, |stream| {
        let h = stream.exponential();
        let s = match cfg.input {
            PsInput::Constant => cfg.mean_power,
            PsInput::Random(dist) => draw_input_power(dist, cfg.mean_power, stream),
        };
        crate::energy::harvest(split * h * s, eh).expect("nonnegative by construction")
    })?;
    let est = ErgodicEstimate::from_samples(&samples);
    Ok(EhEstimate {
        value: est.mean,
        method: EhMethod::MonteCarlo,
        abs_error: 3.0 * est.std_error,
    })
}

/// Exact value of [`ps_energy`] for constant transmit power. With
/// `c = (1 - rho) E`, `a = P_th / c`, `b = P_sat / c` it is
/// `eta c [(1 + a) e^-a - (1 + b) e^-b] + eta P_sat e^-b`.
pub fn ps_energy_closed(cfg: &PsConfig, eh: &EhParams) -> Result<EhEstimate> {
    cfg.validate()?;
    eh.validate()?;
    if cfg.input != PsInput::Constant {
        return Err(invalid("rho", cfg.rho, "closed form needs constant transmit power"));
    }
    let c = (1.0 - cfg.rho) * cfg.mean_power;
    let value = if c == 0.0 || eh.eta == 0.0 {
        0.0
    } else {
        let a = eh.p_th / c;
        let b = eh.p_sat / c;
        let tail = |t: f64| if t.is_infinite() { 0.0 } else { (1.0 + t) * (-t).exp() };
        let sat = if eh.p_sat.is_infinite() { 0.0 } else { eh.p_sat * (-b).exp() };
        eh.eta * (c * (tail(a) - tail(b)) + sat)
    };
    Ok(EhEstimate {
        value,
        method: EhMethod::ClosedForm,
        abs_error: 0.0,
    })
}
