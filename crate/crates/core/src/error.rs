use crate::quadrature::IntegrationResult;

/// Errors raised by the numerical kernels and model builders.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{function}: argument {value} is outside the domain")]
    Domain { function: &'static str, value: f64 },

    #[error("incomplete gamma is only implemented for s = 0 and s = 2, got s = {0}")]
    UnsupportedGammaOrder(f64),

    #[error("modified Bessel K is only implemented for orders 0, 1 and 2, got {0}")]
    UnsupportedBesselOrder(u32),

    #[error(
        "quadrature did not converge after {} evaluations (best estimate {}, error estimate {})",
        .best.evaluations, .best.value, .best.abs_error_estimate
    )]
    NonConvergence { best: IntegrationResult },

    #[error("integrand is not finite at x = {0}")]
    NonFiniteIntegrand(f64),

    #[error("relative tolerance {0} is outside (1e-14, 1e-2)")]
    InvalidTolerance(f64),

    #[error("invalid integration interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("fading gain h[{index}] is zero, the temperature channel is singular")]
    SingularChannel { index: usize },

    #[error("a temperature channel needs at least one channel use")]
    EmptyChannel,

    #[error("{what}: expected length {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("Monte Carlo estimation needs at least one trial")]
    ZeroTrials,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}
