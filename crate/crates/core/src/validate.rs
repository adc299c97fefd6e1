//! Self-check suite: matrix identities, oracle agreement of every closed
//! form, special-function grids and Monte Carlo consistency. Failures are
//! reported, never thrown.

use std::time::Instant;

use serde::Serialize;

use crate::baseline::{ps_energy_closed, ps_rate, PsConfig};
use crate::bound::{ergodic_capacity_bound, minimized_params, r_bar_bits, suboptimal_params, BoundSettings, LogBase};
use crate::channel::{
    inverse_residual, log_det_ratio_closed, simulate_trace, ChannelRealization, InputDistribution, TemperatureChannel,
    ThermalParams,
};
use crate::energy::{
    average_harvested_uncorrected, average_harvested_closed, average_harvested_mc, average_harvested_quadrature,
    received_power_pdf, EhParams,
};
use crate::montecarlo::RngStream;
use crate::oracle::{self, log_grid};
use crate::quadrature::integrate;
use crate::rates::{ergodic_rate, ergodic_rate_quadrature, rate_ci_explicit, rate_ci_generic, RateConfig};
use crate::specfun::{self, bessel_k, upper_incomplete_gamma};

const SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, Default)]
pub struct ValidateOptions {
    /// Negate the subdiagonal of `B` before the inverse check. Used to show
    /// the check can fail.
    pub flip_b_subdiagonal: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub measured: f64,
    /// `None` for checks that only report a number.
    pub threshold: Option<f64>,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub checks: Vec<CheckOutcome>,
    pub seconds: f64,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// A check's measurement against its limit; smaller is better.
struct Measured {
    value: f64,
    limit: Option<f64>,
    detail: String,
}

impl Measured {
    fn at_most(value: f64, limit: f64, detail: impl Into<String>) -> Self {
        Self {
            value,
            limit: Some(limit),
            detail: detail.into(),
        }
    }

    fn report(value: f64, detail: impl Into<String>) -> Self {
        Self {
            value,
            limit: None,
            detail: detail.into(),
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

/// Random test channel: `N` uniform on `1..=8`, `beta` uniform on `[0, 1]`,
/// gains uniform on `(0, 10]`, remaining constants at their defaults.
pub fn random_test_channel(stream: &mut RngStream) -> (ThermalParams, ChannelRealization) {
    let n = 1 + (stream.uniform() * 8.0) as usize;
    let beta = stream.uniform();
    let gains = (0..n).map(|_| 10.0 * (1.0 - stream.uniform())).collect();
    let params = ThermalParams {
        beta,
        ..ThermalParams::default()
    };
    (params, ChannelRealization::new(gains).expect("nonempty, positive"))
}

fn random_channels(count: u64) -> Vec<(ThermalParams, ChannelRealization, TemperatureChannel)> {
    (0..count)
        .map(|t| {
            let (p, r) = random_test_channel(&mut RngStream::new(SEED, t));
            let ch = TemperatureChannel::build(&p, &r).expect("valid by construction");
            (p, r, ch)
        })
        .collect()
}

fn inverse_identity(opts: ValidateOptions) -> Measured {
    let mut worst: f64 = 0.0;
    for (_, _, ch) in random_channels(200) {
        let mut b = ch.matrix_b().clone();
        if opts.flip_b_subdiagonal {
            for i in 1..b.nrows() {
                b[(i, i - 1)] = -b[(i, i - 1)];
            }
        }
        worst = worst.max(inverse_residual(ch.matrix_a(), &b));
    }
    Measured::at_most(worst, 1e-10, "max |A B - I| over 200 random channels")
}

fn row_norms_vs_dense() -> Measured {
    let mut worst: f64 = 0.0;
    for (_, _, ch) in random_channels(200) {
        let inv = ch.matrix_a().clone().try_inverse().expect("triangular with nonzero diagonal");
        for (i, closed) in ch.row_norm_sq().iter().enumerate() {
            worst = worst.max(rel(*closed, inv.row(i).norm_squared()));
        }
    }
    Measured::at_most(worst, 1e-10, "closed-form ||b_i||^2 vs dense inverse of A")
}

fn s_diagonal_vs_dense() -> Measured {
    let mut worst: f64 = 0.0;
    for (_, _, ch) in random_channels(200) {
        let a = ch.matrix_a();
        let s = (a.transpose() * a).try_inverse().expect("positive definite");
        for (i, norm) in ch.row_norm_sq().iter().enumerate() {
            worst = worst.max(rel(s[(i, i)], *norm));
        }
        for (i, d) in ch.s_diagonal().iter().enumerate() {
            worst = worst.max(rel(*d, ch.row_norm_sq()[i]));
        }
    }
    Measured::at_most(worst, 1e-10, "diag((A^T A)^-1) and diag(B B^T) vs ||b_i||^2")
}

fn log_det_closed_vs_matrix() -> Measured {
    let mut worst: f64 = 0.0;
    for (p, _, ch) in random_channels(200) {
        let a = ch.matrix_a();
        let s = (a.transpose() * a).try_inverse().expect("positive definite");
        let dense = 0.5 * ((0..ch.n()).map(|i| s[(i, i)].ln()).sum::<f64>() - s.determinant().ln())
            / std::f64::consts::LN_2;
        let closed = log_det_ratio_closed(ch.n(), p.beta);
        worst = worst.max((dense - closed).abs()).max((ch.log_det_ratio() - closed).abs());
    }
    Measured::at_most(worst, 1e-9, "log-det ratio: dense determinant and diagonal form vs closed form (bits)")
}

fn rate_forms_agree() -> Measured {
    let mut worst: f64 = 0.0;
    for t in 0..1000 {
        let mut stream = RngStream::new(SEED + 1, t);
        let (p, r) = random_test_channel(&mut stream);
        let ch = TemperatureChannel::build(&p, &r).expect("valid");
        let e = 10f64.powf(-2.0 + 6.0 * stream.uniform());
        let cfg = RateConfig::new(e, 1.0, r.len()).expect("valid");
        for d in InputDistribution::ALL {
            worst = worst.max(rel(rate_ci_explicit(d, &p, &r, &cfg), rate_ci_generic(d, &ch, &cfg)));
        }
    }
    Measured::at_most(worst, 1e-12, "explicit vs row-norm rate, 1000 random channels")
}

fn input_ordering() -> Measured {
    let mut violations = 0.0;
    for t in 0..1000 {
        let mut stream = RngStream::new(SEED + 2, t);
        let (p, r) = random_test_channel(&mut stream);
        let e = 10f64.powf(-2.0 + 6.0 * stream.uniform());
        let cfg = RateConfig::new(e, 1.0, r.len()).expect("valid");
        let exp = rate_ci_explicit(InputDistribution::Exponential, &p, &r, &cfg);
        let uni = rate_ci_explicit(InputDistribution::Uniform, &p, &r, &cfg);
        if !(exp > uni) {
            violations += 1.0;
        }
    }
    Measured::at_most(violations, 0.0, "realizations with exponential rate <= uniform rate")
}

fn trace_matches_matrix() -> Measured {
    let mut worst: f64 = 0.0;
    for (t, (p, r, ch)) in random_channels(100).into_iter().enumerate() {
        let mut stream = RngStream::new(SEED + 3, t as u64);
        let powers: Vec<f64> = (0..r.len()).map(|_| 10.0 * stream.uniform()).collect();
        let trace = simulate_trace(&p, &r, &powers, &vec![0.0; r.len()]).expect("valid");
        let s = nalgebra::DVector::from_vec(powers);
        let expected = ch.matrix_a() * s;
        for i in 0..r.len() {
            worst = worst.max((trace.temps[i + 1] - p.t_env - expected[i]).abs());
        }
    }
    Measured::at_most(worst, 1e-12, "zero-noise recursion vs T_e + A S (K)")
}

fn specfun_grid() -> Measured {
    let mut worst: f64 = 0.0;
    let mut worst_at = String::new();
    let mut track = |name: &str, x: f64, got: f64, want: f64| {
        let e = rel(got, want);
        if e > worst {
            worst = e;
            worst_at = format!("{name}({x:.4e})");
        }
    };
    for x in log_grid(1e-3, 35.0, 60) {
        track("Q", x, specfun::q_function(x), oracle::q_function(x).expect("oracle"));
    }
    for x in log_grid(1e-3, 50.0, 60) {
        for order in 0..=2 {
            let name = ["K0", "K1", "K2"][order as usize];
            track(name, x, bessel_k(order, x).expect("x > 0"), oracle::bessel_k(order, x).expect("oracle"));
        }
        track(
            "Gamma0",
            x,
            upper_incomplete_gamma(0.0, x).expect("x > 0"),
            oracle::exp_integral_e1(x).expect("oracle"),
        );
        track(
            "Gamma2",
            x,
            upper_incomplete_gamma(2.0, x).expect("x > 0"),
            oracle::upper_incomplete_gamma(2.0, x).expect("oracle"),
        );
    }
    Measured::at_most(worst, 1e-10, format!("max relative error vs quadrature oracle, worst at {worst_at}"))
}

fn specfun_identities() -> Measured {
    let mut worst: f64 = 0.0;
    for x in log_grid(1e-3, 50.0, 80) {
        let (k0, k1, k2) = (bessel_k(0, x).unwrap(), bessel_k(1, x).unwrap(), bessel_k(2, x).unwrap());
        worst = worst.max(rel(k0 + 2.0 / x * k1, k2));
    }
    for x in log_grid(1e-3, 35.0, 80) {
        worst = worst.max((specfun::q_function(x) + specfun::q_function(-x) - 1.0).abs());
    }
    Measured::at_most(worst, 1e-12, "K2 = K0 + 2K1/x and Q(x) + Q(-x) = 1")
}

fn pdf_normalization() -> Measured {
    let mut worst: f64 = 0.0;
    for d in InputDistribution::ALL {
        for &e in &[0.1, 1.0, 10.0] {
            let total = integrate(|x| received_power_pdf(d, e, x).unwrap_or(0.0), 0.0, f64::INFINITY, 1e-10)
                .map(|r| r.value)
                .unwrap_or(f64::NAN);
            worst = worst.max((total - 1.0).abs());
        }
    }
    Measured::at_most(worst, 1e-8, "|int pdf - 1| for both inputs at E = 0.1, 1, 10")
}

fn energy_closed_vs_quadrature() -> Measured {
    let eh = EhParams::default();
    let mut worst: f64 = 0.0;
    for d in InputDistribution::ALL {
        for e in log_grid(0.1, 10.0, 25) {
            let c = average_harvested_closed(d, e, &eh).expect("valid").value;
            let q = average_harvested_quadrature(d, e, &eh, 1e-10).map(|q| q.value).unwrap_or(f64::NAN);
            worst = worst.max(rel(c, q));
        }
    }
    Measured::at_most(worst, 1e-6, "closed-form harvested power vs quadrature, 25 points in [0.1, 10] mW")
}

fn uncorrected_discrepancy(dist: InputDistribution) -> Measured {
    let eh = EhParams::default();
    let mut worst: f64 = 0.0;
    let mut worst_e = 0.0;
    for e in log_grid(0.1, 10.0, 25) {
        let q = average_harvested_quadrature(dist, e, &eh, 1e-10).map(|q| q.value).unwrap_or(f64::NAN);
        let p = average_harvested_uncorrected(dist, e, &eh).expect("valid");
        let r = rel(p, q);
        if r > worst {
            worst = r;
            worst_e = e;
        }
    }
    Measured::report(
        worst,
        format!("uncorrected {dist} closed form vs quadrature: max relative discrepancy at E = {worst_e:.3} mW"),
    )
}

fn energy_mc_vs_quadrature() -> Measured {
    let eh = EhParams::default();
    let mut worst: f64 = 0.0;
    for d in InputDistribution::ALL {
        for (k, &e) in [0.5, 1.0, 2.0, 5.0].iter().enumerate() {
            let mc = average_harvested_mc(d, e, &eh, 200_000, SEED + k as u64).expect("valid");
            let q = average_harvested_quadrature(d, e, &eh, 1e-10).map(|q| q.value).unwrap_or(f64::NAN);
            worst = worst.max((mc.value - q).abs() / (mc.abs_error / 3.0));
        }
    }
    Measured::at_most(worst, 3.0, "|MC - quadrature| in standard errors, 2e5 trials")
}

fn bound_minimizer_dominance() -> Measured {
    let mut worst = f64::NEG_INFINITY;
    for a in log_grid(1e-3, 1e3, 12) {
        let sub = r_bar_bits(a, 1.0, &suboptimal_params(a, 1.0), LogBase::Nat);
        let (_, min) = minimized_params(a, 1.0, LogBase::Nat);
        worst = worst.max(min - sub);
    }
    Measured::at_most(worst, 0.0, "max(rbar minimized - rbar suboptimal) over amplitudes (bits)")
}

fn bound_above_rate() -> Measured {
    let params = ThermalParams::default();
    let mut worst = f64::NEG_INFINITY;
    for e in log_grid(1.0, 1e4, 5) {
        let cfg = RateConfig::new(e, 1.0, 4).expect("valid");
        let rate = ergodic_rate(InputDistribution::Exponential, &params, &cfg, 2000, SEED).expect("valid");
        let bound = ergodic_capacity_bound(&params, &cfg, 2000, SEED, &BoundSettings::default()).expect("valid");
        worst = worst.max((rate.mean - bound.mean) / rate.combined_std_error(&bound).max(f64::MIN_POSITIVE));
    }
    Measured::at_most(worst, 3.0, "max (rate - bound) in combined standard errors, N = 4")
}

fn ergodic_rate_vs_quadrature() -> Measured {
    let params = ThermalParams::default();
    let mut worst: f64 = 0.0;
    for d in InputDistribution::ALL {
        for &n in &[1, 4, 6] {
            for &e in &[1.0, 10.0, 100.0, 1000.0] {
                let cfg = RateConfig::new(e, 1.0, n).expect("valid");
                let mc = ergodic_rate(d, &params, &cfg, 20_000, SEED).expect("valid");
                let q = ergodic_rate_quadrature(d, &params, &cfg).unwrap_or(f64::NAN);
                worst = worst.max((mc.mean - q).abs() / mc.std_error);
            }
        }
    }
    Measured::at_most(worst, 4.0, "|MC ergodic rate - quadrature| in standard errors, 24 points")
}

fn rate_nonincreasing_in_n() -> Measured {
    let params = ThermalParams::default();
    let mut worst = f64::NEG_INFINITY;
    for d in InputDistribution::ALL {
        for e in log_grid(1.0, 1e4, 21) {
            let at = |n| ergodic_rate_quadrature(d, &params, &RateConfig::new(e, 1.0, n).expect("valid")).unwrap_or(f64::NAN);
            let rates: Vec<f64> = (1..=8).map(at).collect();
            for w in rates.windows(2) {
                worst = worst.max(w[1] - w[0]);
            }
        }
    }
    Measured::at_most(worst, 0.0, "max R(N+1) - R(N), N = 1..7, exact ergodic rate (bits)")
}

fn ps_rate_vs_quadrature() -> Measured {
    let cfg = PsConfig::new(1.0, 10.0, 1.0).expect("valid");
    let mc = ps_rate(&cfg, 200_000, SEED).expect("valid");
    let q = integrate(|h| (10.0 * h).ln_1p() / std::f64::consts::LN_2 * (-h).exp(), 0.0, f64::INFINITY, 1e-12)
        .map(|r| r.value)
        .unwrap_or(f64::NAN);
    Measured::at_most((mc.mean - q).abs() / mc.std_error, 3.0, "power-splitting rate MC vs quadrature, standard errors")
}

/// Largest shortfall of the proposed scheme's harvested power below the
/// power-splitting baseline (rho = 0.5) on the default energy grid.
fn energy_vs_ps(dist: InputDistribution) -> (f64, Option<f64>) {
    let eh = EhParams::default();
    let mut worst = f64::NEG_INFINITY;
    let mut first_below = None;
    for e in log_grid(0.1, 10.0, 25) {
        let ps = ps_energy_closed(&PsConfig::new(0.5, e, 1.0).expect("valid"), &eh).expect("valid").value;
        let gap = ps - average_harvested_closed(dist, e, &eh).expect("valid").value;
        if gap > 0.0 && first_below.is_none() {
            first_below = Some(e);
        }
        worst = worst.max(gap);
    }
    (worst, first_below)
}

fn uni_energy_vs_ps() -> Measured {
    let (worst, _) = energy_vs_ps(InputDistribution::Uniform);
    Measured::at_most(worst, 0.0, "max(PS - uniform-input harvested power) on [0.1, 10] mW (mW)")
}

fn exp_energy_vs_ps() -> Measured {
    let (worst, first) = energy_vs_ps(InputDistribution::Exponential);
    let detail = match first {
        Some(e) => format!("max(PS - exponential-input harvested power) (mW); PS ahead from E = {e:.3} mW"),
        None => "max(PS - exponential-input harvested power) (mW); never ahead".into(),
    };
    Measured::report(worst, detail)
}

type Check = (&'static str, Box<dyn Fn() -> Measured>);

fn checks(opts: ValidateOptions) -> Vec<Check> {
    vec![
        ("inverse_identity", Box::new(move || inverse_identity(opts))),
        ("row_norms_vs_dense_inverse", Box::new(row_norms_vs_dense)),
        ("s_diagonal_identity", Box::new(s_diagonal_vs_dense)),
        ("log_det_ratio_closed_form", Box::new(log_det_closed_vs_matrix)),
        ("trace_matches_matrix_form", Box::new(trace_matches_matrix)),
        ("rate_forms_agree", Box::new(rate_forms_agree)),
        ("exponential_beats_uniform", Box::new(input_ordering)),
        ("ergodic_rate_vs_quadrature", Box::new(ergodic_rate_vs_quadrature)),
        ("rate_nonincreasing_in_n", Box::new(rate_nonincreasing_in_n)),
        ("specfun_vs_oracle", Box::new(specfun_grid)),
        ("specfun_identities", Box::new(specfun_identities)),
        ("pdf_normalization", Box::new(pdf_normalization)),
        ("energy_closed_vs_quadrature", Box::new(energy_closed_vs_quadrature)),
        (
            "energy_exp_uncorrected_discrepancy",
            Box::new(|| uncorrected_discrepancy(InputDistribution::Exponential)),
        ),
        (
            "energy_uni_uncorrected_discrepancy",
            Box::new(|| uncorrected_discrepancy(InputDistribution::Uniform)),
        ),
        ("energy_mc_vs_quadrature", Box::new(energy_mc_vs_quadrature)),
        ("bound_minimizer_dominance", Box::new(bound_minimizer_dominance)),
        ("bound_above_rate", Box::new(bound_above_rate)),
        ("ps_rate_vs_quadrature", Box::new(ps_rate_vs_quadrature)),
        ("energy_uni_above_ps", Box::new(uni_energy_vs_ps)),
        ("energy_exp_vs_ps", Box::new(exp_energy_vs_ps)),
    ]
}

pub fn run_validate(opts: ValidateOptions) -> Report {
    let start = Instant::now();
    let checks = checks(opts)
        .into_iter()
        .map(|(name, check)| {
            let t = Instant::now();
            let m = check();
            let passed = match m.limit {
                Some(limit) => m.value <= limit,
                None => m.value.is_finite(),
            };
            CheckOutcome {
                name,
                passed,
                measured: m.value,
                threshold: m.limit,
                detail: m.detail,
                seconds: t.elapsed().as_secs_f64(),
            }
        })
        .collect();
    Report {
        checks,
        seconds: start.elapsed().as_secs_f64(),
    }
}
