//! Command-line front end: JSON configuration with flag overrides, sweep
//! execution and CSV output.

// Reference constants keep every digit they were given; `!(x > 0.0)` is
// how parameter checks reject NaN.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod config;
pub mod error;
pub mod output;
pub mod sweep;

pub use app::{execute, resolve_spec, Cli};
pub use config::{BoundMode, PowerGrid, SweepKind, SweepSpec};
pub use error::CliError;
pub use output::{write_rows, ResultRow};
pub use sweep::{run_energy_sweep, run_rate_sweep, run_trace};
