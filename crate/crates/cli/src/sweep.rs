//! Sweep runners. Points run concurrently; rows come back ordered by sweep
//! coordinates. Every Monte Carlo call uses the spec's seed, so curves
//! share random numbers across points.
//!
//! A fading mean `mu != 1` is applied by equivalence: rates and bounds see
//! `alpha mu` in place of `alpha`, harvested energy sees `mu E` in place of
//! `E`. Reported powers stay the nominal `E`.

use rayon::prelude::*;
use tswipt_core::bound::ergodic_capacity_bound_detailed;
use tswipt_core::channel::{sample_rayleigh_gains, simulate_trace, TemperatureTrace};
use tswipt_core::energy::{average_harvested_closed, average_harvested_mc, average_harvested_quadrature, EhEstimate};
use tswipt_core::{
    ergodic_rate, ps_energy, ps_energy_closed, ps_rate, BoundSettings, InputDistribution, PsConfig, RateConfig,
    RngStream, ThermalParams,
};

use crate::config::{SweepKind, SweepSpec};
use crate::error::CliError;
use crate::output::{snr_db, ResultRow};

fn effective_thermal(spec: &SweepSpec) -> ThermalParams {
    ThermalParams {
        alpha: spec.thermal.alpha * spec.fading_mean,
        ..spec.thermal
    }
}

fn row(n: Option<usize>, e: f64, spec: &SweepSpec, dist: &str, metric: &'static str) -> ResultRow {
    ResultRow {
        n,
        mean_power_mw: e,
        snr_db: snr_db(e, spec.thermal.sigma2),
        distribution: dist.to_string(),
        metric,
        value: 0.0,
        std_error: 0.0,
        method: String::new(),
    }
}

fn rate_point(spec: &SweepSpec, n: usize, e: f64) -> Result<Vec<ResultRow>, CliError> {
    let thermal = effective_thermal(spec);
    let cfg = RateConfig::new(e, spec.thermal.sigma2, n)?;
    let mut rows = Vec::new();
    for &dist in &spec.distributions {
        let est = ergodic_rate(dist, &thermal, &cfg, spec.trials, spec.seed)?;
        rows.push(ResultRow {
            value: est.mean,
            std_error: est.std_error,
            method: "monte_carlo".into(),
            ..row(Some(n), e, spec, dist.name(), "ergodic_rate")
        });
    }
    if let Some(tuning) = spec.bound.tuning() {
        let settings = BoundSettings {
            tuning,
            log_base: spec.bound_log_base,
        };
        let b = ergodic_capacity_bound_detailed(&thermal, &cfg, spec.bound_trials(), spec.seed, &settings)?;
        let method = spec.bound.name().to_string();
        rows.push(ResultRow {
            value: b.unscaled.mean,
            std_error: b.unscaled.std_error,
            method: method.clone(),
            ..row(Some(n), e, spec, "any", "capacity_bound")
        });
        rows.push(ResultRow {
            value: b.per_use.mean,
            std_error: b.per_use.std_error,
            method,
            ..row(Some(n), e, spec, "any", "capacity_bound_per_use")
        });
    }
    if spec.baseline {
        let ps = PsConfig::new(spec.rho, e * spec.fading_mean, spec.thermal.sigma2)?;
        let est = ps_rate(&ps, spec.trials, spec.seed)?;
        rows.push(ResultRow {
            value: est.mean,
            std_error: est.std_error,
            method: "monte_carlo".into(),
            ..row(Some(n), e, spec, "gaussian", "ps_rate")
        });
    }
    Ok(rows)
}

fn eh_row(e: f64, spec: &SweepSpec, dist: &str, metric: &'static str, est: EhEstimate, std_error: f64) -> ResultRow {
    ResultRow {
        value: est.value,
        std_error,
        method: est.method.name().into(),
        ..row(None, e, spec, dist, metric)
    }
}

fn energy_point(spec: &SweepSpec, e: f64) -> Result<Vec<ResultRow>, CliError> {
    let eff = e * spec.fading_mean;
    let mut rows = Vec::new();
    for &dist in &spec.distributions {
        let c = average_harvested_closed(dist, eff, &spec.eh)?;
        rows.push(eh_row(e, spec, dist.name(), "harvested_energy", c, 0.0));
        let q = average_harvested_quadrature(dist, eff, &spec.eh, spec.quad_rel_tol)?;
        rows.push(eh_row(e, spec, dist.name(), "harvested_energy", q, q.abs_error));
        let m = average_harvested_mc(dist, eff, &spec.eh, spec.eh_trials, spec.seed)?;
        rows.push(eh_row(e, spec, dist.name(), "harvested_energy", m, m.abs_error / 3.0));
    }
    if spec.baseline {
        let ps = PsConfig::new(spec.rho, eff, spec.thermal.sigma2)?;
        let c = ps_energy_closed(&ps, &spec.eh)?;
        rows.push(eh_row(e, spec, "constant", "ps_harvested_energy", c, 0.0));
        let m = ps_energy(&ps, &spec.eh, spec.eh_trials, spec.seed)?;
        rows.push(eh_row(e, spec, "constant", "ps_harvested_energy", m, m.abs_error / 3.0));
    }
    Ok(rows)
}

fn collect(points: Vec<Result<Vec<ResultRow>, CliError>>) -> Result<Vec<ResultRow>, CliError> {
    let mut rows = Vec::new();
    for p in points {
        rows.extend(p?);
    }
    Ok(rows)
}

/// Rows ordered by `(N, E)` as listed in the spec.
pub fn run_rate_sweep(spec: &SweepSpec) -> Result<Vec<ResultRow>, CliError> {
    spec.validate(SweepKind::Rate)?;
    let grid = spec.grid_for(SweepKind::Rate).values().map_err(CliError::Config)?;
    let coords: Vec<(usize, f64)> = spec
        .n_list
        .iter()
        .flat_map(|&n| grid.iter().map(move |&e| (n, e)))
        .collect();
    collect(coords.par_iter().map(|&(n, e)| rate_point(spec, n, e)).collect())
}

/// Rows ordered by `E` as listed in the spec.
pub fn run_energy_sweep(spec: &SweepSpec) -> Result<Vec<ResultRow>, CliError> {
    spec.validate(SweepKind::Energy)?;
    let grid = spec.grid_for(SweepKind::Energy).values().map_err(CliError::Config)?;
    collect(grid.par_iter().map(|&e| energy_point(spec, e)).collect())
}

/// One block of `n_list[0]` channel uses. Gains, transmit powers and noise
/// come in that order from stream `(seed, 0)`.
pub fn run_trace(spec: &SweepSpec) -> Result<(TemperatureTrace, Vec<f64>, Vec<f64>), CliError> {
    spec.validate(SweepKind::Trace)?;
    let n = spec.n_list[0];
    let mut stream = RngStream::new(spec.seed, 0);
    let real = sample_rayleigh_gains(n, &mut stream)?;
    let gains: Vec<f64> = real.gains().iter().map(|h| h * spec.fading_mean).collect();
    let real = tswipt_core::ChannelRealization::new(gains)?;
    let powers: Vec<f64> = (0..n)
        .map(|_| match spec.trace.input {
            Some(dist) => tswipt_core::sample_input_power(dist, spec.trace.mean_power, &mut stream),
            None => Ok(0.0),
        })
        .collect::<Result<_, _>>()?;
    let sigma = spec.thermal.sigma();
    let noise: Vec<f64> = (0..n)
        .map(|_| {
            let w = sigma * stream.standard_normal();
            if spec.trace.zero_noise {
                0.0
            } else {
                w
            }
        })
        .collect();
    let trace = simulate_trace(&spec.thermal, &real, &powers, &noise)?;
    Ok((trace, powers, real.gains().to_vec()))
}

pub fn write_trace<W: std::io::Write>(
    out: W,
    trace: &TemperatureTrace,
    powers: &[f64],
    gains: &[f64],
) -> Result<(), CliError> {
    use crate::output::fmt_f64;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["slot", "S_i", "h_i", "P_i", "T_i"])?;
    for (i, t) in trace.temps.iter().enumerate() {
        let cell = |v: Option<&f64>| v.map(|x| fmt_f64(*x)).unwrap_or_default();
        w.write_record([
            (i + 1).to_string(),
            cell(powers.get(i)),
            cell(gains.get(i)),
            cell(trace.powers.get(i)),
            fmt_f64(*t),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Distributions are printed in a fixed order regardless of how they were
/// listed, and duplicates are dropped.
pub fn normalize_distributions(list: &mut Vec<InputDistribution>) {
    list.sort();
    list.dedup();
}
