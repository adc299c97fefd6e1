//! Sweep configuration: a JSON document with every field optional, then
//! command-line overrides on top.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use tswipt_core::{EhParams, InputDistribution, LogBase, ThermalParams, Tuning};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    Rate,
    Energy,
    Trace,
    Validate,
}

/// Whether and how the capacity bound is computed in rate sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BoundMode {
    #[serde(rename = "off")]
    Off,
    #[default]
    #[serde(rename = "sub", alias = "suboptimal")]
    Suboptimal,
    #[serde(rename = "min", alias = "minimized")]
    Minimized,
}

impl BoundMode {
    pub fn tuning(&self) -> Option<Tuning> {
        match self {
            BoundMode::Off => None,
            BoundMode::Suboptimal => Some(Tuning::Suboptimal),
            BoundMode::Minimized => Some(Tuning::Minimized),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BoundMode::Off => "off",
            BoundMode::Suboptimal => "sub",
            BoundMode::Minimized => "min",
        }
    }
}

impl FromStr for BoundMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "off" => Ok(BoundMode::Off),
            "sub" | "suboptimal" => Ok(BoundMode::Suboptimal),
            "min" | "minimized" => Ok(BoundMode::Minimized),
            other => Err(format!("unknown bound mode `{other}` (expected off, sub or min)")),
        }
    }
}

/// Transmit-power grid in mW.
///
/// Text form: `log:FROM:TO:POINTS`, `lin:FROM:TO:POINTS`,
/// `db:FROM_DB:TO_DB:POINTS` (dBm, converted to mW), or `list:V1,V2,...`.
/// JSON accepts the same string or a plain array of mW values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PowerGrid {
    Values(Vec<f64>),
    Spec(String),
}

impl PowerGrid {
    pub fn values(&self) -> Result<Vec<f64>, String> {
        let values = match self {
            PowerGrid::Values(v) => v.clone(),
            PowerGrid::Spec(s) => parse_grid(s)?,
        };
        if values.is_empty() {
            return Err("power grid is empty".into());
        }
        if let Some(bad) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(format!("power grid value {bad} is not a finite nonnegative mW value"));
        }
        Ok(values)
    }
}

impl fmt::Display for PowerGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PowerGrid::Spec(s) => f.write_str(s),
            PowerGrid::Values(v) => {
                let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "list:{}", items.join(","))
            }
        }
    }
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| format!("power grid `{spec}`: expected KIND:..."))?;
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("power grid `{spec}`: `{s}`: {e}"));
    if kind == "list" {
        return rest.split(',').map(num).collect();
    }
    let parts: Vec<&str> = rest.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("power grid `{spec}`: expected {kind}:FROM:TO:POINTS"));
    }
    let (from, to) = (num(parts[0])?, num(parts[1])?);
    let points: usize = parts[2]
        .trim()
        .parse()
        .map_err(|e| format!("power grid `{spec}`: points: {e}"))?;
    if points == 0 {
        return Err(format!("power grid `{spec}`: needs at least one point"));
    }
    let step = |i: usize| if points == 1 { 0.0 } else { i as f64 / (points - 1) as f64 };
    match kind {
        "lin" => Ok((0..points).map(|i| from + (to - from) * step(i)).collect()),
        "log" => {
            if !(from > 0.0 && to > 0.0) {
                return Err(format!("power grid `{spec}`: log spacing needs positive ends"));
            }
            let (a, b) = (from.log10(), to.log10());
            Ok((0..points)
                .map(|i| match i {
                    0 => from,
                    i if i == points - 1 => to,
                    _ => 10f64.powf(a + (b - a) * step(i)),
                })
                .collect())
        }
        "db" => Ok((0..points)
            .map(|i| 10f64.powf((from + (to - from) * step(i)) / 10.0))
            .collect()),
        other => Err(format!("power grid `{spec}`: unknown spacing `{other}` (lin, log, db, list)")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceSpec {
    /// Input distribution of the transmit powers; `None` sends nothing.
    pub input: Option<InputDistribution>,
    /// Mean transmit power, mW.
    pub mean_power: f64,
    pub zero_noise: bool,
}

impl Default for TraceSpec {
    fn default() -> Self {
        Self {
            input: Some(InputDistribution::Exponential),
            mean_power: 10.0,
            zero_noise: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub n_list: Vec<usize>,
    /// `None` picks the default grid for the sweep kind.
    pub power_grid: Option<PowerGrid>,
    pub distributions: Vec<InputDistribution>,
    /// Monte Carlo blocks per rate point.
    pub trials: u64,
    /// Blocks per bound point; defaults to `trials`.
    pub bound_trials: Option<u64>,
    /// Draws per Monte Carlo harvested-energy point.
    pub eh_trials: u64,
    pub seed: u64,
    pub thermal: ThermalParams,
    pub eh: EhParams,
    pub bound: BoundMode,
    pub bound_log_base: LogBase,
    pub baseline: bool,
    pub rho: f64,
    /// Mean of the fading power gain.
    pub fading_mean: f64,
    pub quad_rel_tol: f64,
    pub trace: TraceSpec,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            n_list: vec![4, 6],
            power_grid: None,
            distributions: InputDistribution::ALL.to_vec(),
            trials: 10_000,
            bound_trials: None,
            eh_trials: 1_000_000,
            seed: 1,
            thermal: ThermalParams::default(),
            eh: EhParams::default(),
            bound: BoundMode::default(),
            bound_log_base: LogBase::Nat,
            baseline: false,
            rho: 0.5,
            fading_mean: 1.0,
            quad_rel_tol: 1e-10,
            trace: TraceSpec::default(),
        }
    }
}

pub const DEFAULT_RATE_GRID: &str = "log:1:1e4:21";
pub const DEFAULT_ENERGY_GRID: &str = "log:0.1:10:25";

impl SweepSpec {
    pub fn from_json_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn grid_for(&self, kind: SweepKind) -> PowerGrid {
        self.power_grid.clone().unwrap_or_else(|| {
            PowerGrid::Spec(
                match kind {
                    SweepKind::Energy => DEFAULT_ENERGY_GRID,
                    _ => DEFAULT_RATE_GRID,
                }
                .into(),
            )
        })
    }

    pub fn bound_trials(&self) -> u64 {
        self.bound_trials.unwrap_or(self.trials)
    }

    /// Checks every field and lists all problems at once.
    pub fn validate(&self, kind: SweepKind) -> Result<(), CliError> {
        let mut problems = Vec::new();
        if self.n_list.is_empty() {
            problems.push("n_list: empty".to_string());
        }
        if self.n_list.contains(&0) {
            problems.push("n_list: channel-use counts must be >= 1".to_string());
        }
        if let Err(e) = self.grid_for(kind).values() {
            problems.push(format!("power_grid: {e}"));
        }
        if self.distributions.is_empty() {
            problems.push("distributions: empty".to_string());
        }
        if self.trials == 0 {
            problems.push("trials: must be >= 1".to_string());
        }
        if self.bound_trials == Some(0) {
            problems.push("bound_trials: must be >= 1".to_string());
        }
        if self.eh_trials == 0 {
            problems.push("eh_trials: must be >= 1".to_string());
        }
        if let Err(e) = self.thermal.validate() {
            problems.push(format!("thermal: {e}"));
        }
        if !(self.thermal.alpha > 0.0) {
            problems.push("thermal.alpha: must be > 0".to_string());
        }
        if let Err(e) = self.eh.validate() {
            problems.push(format!("eh: {e}"));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            problems.push(format!("rho: {} outside [0, 1]", self.rho));
        }
        if !(self.fading_mean > 0.0 && self.fading_mean.is_finite()) {
            problems.push(format!("fading_mean: {} must be finite and > 0", self.fading_mean));
        }
        if !(self.quad_rel_tol > 1e-14 && self.quad_rel_tol < 1e-2) {
            problems.push(format!("quad_rel_tol: {} outside (1e-14, 1e-2)", self.quad_rel_tol));
        }
        if !(self.trace.mean_power >= 0.0 && self.trace.mean_power.is_finite()) {
            problems.push(format!("trace.mean_power: {} must be finite and >= 0", self.trace.mean_power));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CliError::InvalidSpec(problems))
        }
    }
}

/// Parses a comma-separated list with each item's `FromStr`.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<T>().map_err(|e| format!("`{}`: {e}", p.trim())))
        .collect()
}
