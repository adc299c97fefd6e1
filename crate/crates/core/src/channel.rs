//! Thermal dynamics at the receiver and the virtual MIMO channel they induce.
//!
//! The receiver temperature follows the first-order heat circuit
//! `T[i+1] = T[i] + alpha * P[i] - beta * (T[i] - T_e)` with `T[1] = T_e`
//! and received power `P[i] = h[i] * S[i]`. Stacking `N` consecutive slots
//! gives `T[2..=N+1] - T_e = A * S + w` with the lower-triangular matrix
//! `A[i][j] = alpha * (1 - beta)^(i - j) * h[j]` for `j <= i`.
//!
//! `A` factors as `L * diag(alpha * h)` where `L` is the Toeplitz matrix of
//! powers of `1 - beta`. `L^-1` is lower-bidiagonal with unit diagonal and
//! `beta - 1` below it, hence `B = A^-1 = diag(1 / (alpha * h)) * L^-1`:
//! `B[i][i] = 1 / (alpha h[i])`, `B[i][i-1] = (beta - 1) / (alpha h[i])`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::montecarlo::RngStream;

/// Heat-circuit constants and thermometer noise. Temperatures in K, powers
/// in mW, one slot per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermalParams {
    /// Temperature rise per mW of received power per slot.
    pub alpha: f64,
    /// Fraction of the excess temperature lost per slot.
    pub beta: f64,
    /// Environment temperature.
    pub t_env: f64,
    /// Thermometer noise variance.
    pub sigma2: f64,
}

impl Default for ThermalParams {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 1.0 - (-0.3f64).exp(),
            t_env: 300.0,
            sigma2: 1.0,
        }
    }
}

impl ThermalParams {
    pub fn new(alpha: f64, beta: f64, t_env: f64, sigma2: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            t_env,
            sigma2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha", self.alpha, "must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(invalid("beta", self.beta, "must lie in [0, 1]"));
        }
        if !(self.t_env > 0.0 && self.t_env.is_finite()) {
            return Err(invalid("t_env", self.t_env, "must be finite and > 0"));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(invalid("sigma2", self.sigma2, "must be finite and > 0"));
        }
        Ok(())
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    /// `1 + (beta - 1)^2`, the squared row norm of `L^-1` below the first row.
    pub fn memory_factor(&self) -> f64 {
        1.0 + (self.beta - 1.0).powi(2)
    }
}

/// Fading power gains `h[i] = |g[i]|^2` for one block of channel uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    gains: Vec<f64>,
}

impl ChannelRealization {
    pub fn new(gains: Vec<f64>) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::EmptyChannel);
        }
        if let Some(&g) = gains.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
            return Err(invalid("gain", g, "fading gains must be finite and >= 0"));
        }
        Ok(Self { gains })
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }
}

/// I.i.d. unit-mean exponential power gains (Rayleigh amplitude fading).
///
/// A non-unit mean `m` is equivalent to scaling `alpha` by `m` for the
/// temperature channel, or the mean input power by `m` for harvesting.
pub fn sample_rayleigh_gains(n: usize, stream: &mut RngStream) -> Result<ChannelRealization> {
    if n == 0 {
        return Err(Error::EmptyChannel);
    }
    Ok(ChannelRealization {
        gains: (0..n).map(|_| stream.exponential()).collect(),
    })
}

/// Transmit power distribution with mean `E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InputDistribution {
    /// Exponential with mean `E`.
    #[serde(rename = "exp", alias = "exponential")]
    Exponential,
    /// Uniform on `[0, 2E]`.
    #[serde(rename = "uni", alias = "uniform")]
    Uniform,
}

impl InputDistribution {
    pub const ALL: [InputDistribution; 2] = [InputDistribution::Exponential, InputDistribution::Uniform];

    pub fn name(&self) -> &'static str {
        match self {
            InputDistribution::Exponential => "exp",
            InputDistribution::Uniform => "uni",
        }
    }
}

impl fmt::Display for InputDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InputDistribution {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exp" | "exponential" => Ok(InputDistribution::Exponential),
            "uni" | "uniform" => Ok(InputDistribution::Uniform),
            other => Err(format!("unknown input distribution `{other}` (expected exp or uni)")),
        }
    }
}

pub fn sample_input_power(dist: InputDistribution, mean: f64, stream: &mut RngStream) -> Result<f64> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(invalid("mean power", mean, "must be finite and >= 0"));
    }
    Ok(draw_input_power(dist, mean, stream))
}

#[inline]
pub(crate) fn draw_input_power(dist: InputDistribution, mean: f64, stream: &mut RngStream) -> f64 {
    match dist {
        InputDistribution::Exponential => mean * stream.exponential(),
        InputDistribution::Uniform => 2.0 * mean * stream.uniform(),
    }
}

/// The `N x N` virtual MIMO temperature channel and its closed-form inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureChannel {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    row_norm_sq: Vec<f64>,
}

impl TemperatureChannel {
    pub fn build(params: &ThermalParams, realization: &ChannelRealization) -> Result<Self> {
        params.validate()?;
        if !(params.alpha > 0.0) {
            return Err(invalid("alpha", params.alpha, "must be > 0 for an invertible channel"));
        }
        let h = realization.gains();
        let n = h.len();
        if n == 0 {
            return Err(Error::EmptyChannel);
        }
        if let Some(index) = h.iter().position(|&g| g == 0.0) {
            return Err(Error::SingularChannel { index });
        }

        let alpha = params.alpha;
        let decay = 1.0 - params.beta;
        let a = DMatrix::from_fn(n, n, |i, j| {
            if j <= i {
                alpha * decay.powi((i - j) as i32) * h[j]
            } else {
                0.0
            }
        });
        let b = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                1.0 / (alpha * h[i])
            } else if j + 1 == i {
                (params.beta - 1.0) / (alpha * h[i])
            } else {
                0.0
            }
        });
        let memory = params.memory_factor();
        let row_norm_sq = h
            .iter()
            .enumerate()
            .map(|(i, &hi)| {
                let base = 1.0 / (alpha * hi).powi(2);
                if i == 0 {
                    base
                } else {
                    memory * base
                }
            })
            .collect();
        Ok(Self { a, b, row_norm_sq })
    }

    pub fn n(&self) -> usize {
        self.row_norm_sq.len()
    }

    pub fn matrix_a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn matrix_b(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// `||b_i||^2` for each row of `B`, from the closed form.
    pub fn row_norm_sq(&self) -> &[f64] {
        &self.row_norm_sq
    }

    /// `diag((A^T A)^-1)`, evaluated as `diag(B B^T)` from the explicit `B`.
    pub fn s_diagonal(&self) -> Vec<f64> {
        self.b.row_iter().map(|row| row.iter().map(|v| v * v).sum()).collect()
    }

    /// `1/2 log2(prod s_ii / det S)` in bits, with `det S = prod (alpha h_i)^-2`
    /// read off the diagonal of the triangular `A`.
    pub fn log_det_ratio(&self) -> f64 {
        let s = self.s_diagonal();
        0.5 * s
            .iter()
            .zip(self.a.diagonal().iter())
            .map(|(sii, aii)| (sii * aii * aii).log2())
            .sum::<f64>()
    }
}

/// Closed form of [`TemperatureChannel::log_det_ratio`]:
/// `(N - 1) / 2 * log2(1 + (beta - 1)^2)`, independent of the fading.
pub fn log_det_ratio_closed(n: usize, beta: f64) -> f64 {
    0.5 * n.saturating_sub(1) as f64 * (1.0 + (beta - 1.0).powi(2)).log2()
}

/// `max |(A B - I)_ij|`.
pub fn inverse_residual(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let prod = a * b;
    let n = prod.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - target).abs());
        }
    }
    worst
}

/// Observed temperatures `T[1..=N+1]` and received powers `P[1..=N]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemperatureTrace {
    pub temps: Vec<f64>,
    pub powers: Vec<f64>,
}

/// Runs the heat recursion for one block.
///
/// `noise[i]` is thermometer noise added to the reading of `T[i+1]`; it does
/// not feed back into the dynamics, so a zero noise vector reproduces
/// `T_e + A * S` exactly.
pub fn simulate_trace(
    params: &ThermalParams,
    realization: &ChannelRealization,
    powers: &[f64],
    noise: &[f64],
) -> Result<TemperatureTrace> {
    let n = realization.len();
    if powers.len() != n {
        return Err(Error::LengthMismatch {
            what: "transmit powers",
            expected: n,
            got: powers.len(),
        });
    }
    if noise.len() != n {
        return Err(Error::LengthMismatch {
            what: "noise samples",
            expected: n,
            got: noise.len(),
        });
    }
    if let Some(&s) = powers.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
        return Err(invalid("transmit power", s, "must be finite and >= 0"));
    }

    let received: Vec<f64> = realization.gains().iter().zip(powers).map(|(h, s)| h * s).collect();
    let mut temps = Vec::with_capacity(n + 1);
    temps.push(params.t_env);
    // Track the excess over T_e to keep T_e's magnitude out of the sums.
    let mut excess = 0.0;
    for (p, w) in received.iter().zip(noise) {
        excess = (1.0 - params.beta) * excess + params.alpha * p;
        temps.push(params.t_env + excess + w);
    }
    Ok(TemperatureTrace {
        temps,
        powers: received,
    })
}
