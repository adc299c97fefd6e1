//! Temperature-modulated SWIPT channel: virtual MIMO construction, channel
//! inversion rates, an ergodic capacity upper bound, and average harvested
//! energy under a piecewise-linear harvester, each with an independent
//! numerical oracle.
//!
//! Units: powers in mW, temperatures in K, one slot per channel use.

// Reference constants keep every digit they were given; `!(x > 0.0)` is
// how parameter checks reject NaN.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod bound;
pub mod channel;
pub mod energy;
pub mod error;
pub mod montecarlo;
pub mod oracle;
pub mod quadrature;
pub mod rates;
pub mod specfun;
pub mod validate;

pub use baseline::{ps_energy, ps_energy_closed, ps_rate, PsConfig, PsInput};
pub use bound::{
    ergodic_capacity_bound, ergodic_capacity_bound_detailed, r_bar, suboptimal_params, BoundParams, BoundSettings,
    CapacityBound, LogBase, Tuning,
};
pub use channel::{
    sample_input_power, sample_rayleigh_gains, simulate_trace, ChannelRealization, InputDistribution,
    TemperatureChannel, TemperatureTrace, ThermalParams,
};
pub use energy::{
    average_harvested_closed, average_harvested_mc, average_harvested_quadrature, harvest, received_power_pdf,
    EhEstimate, EhMethod, EhParams,
};
pub use error::{Error, Result};
pub use montecarlo::{ErgodicEstimate, RngStream};
pub use quadrature::{integrate, minimize_2d, IntegrationResult, SearchBox};
pub use rates::{ergodic_rate, rate_ci_explicit, rate_ci_generic, RateConfig};
pub use validate::{run_validate, CheckOutcome, Report, ValidateOptions};
