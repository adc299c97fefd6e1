//! Acceptance suite. Runs every criterion once, prints one line each and
//! exits nonzero if any fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::Command;
use std::time::Instant;

use tswipt_cli::config::DEFAULT_RATE_GRID;
use tswipt_cli::PowerGrid;
use tswipt_core::bound::{ergodic_capacity_bound_detailed, BoundSettings, Tuning};
use tswipt_core::channel::log_det_ratio_closed;
use tswipt_core::energy::{average_harvested_uncorrected, received_power_pdf};
use tswipt_core::oracle::{self, log_grid};
use tswipt_core::rates::ergodic_rate_quadrature;
use tswipt_core::specfun;
use tswipt_core::validate::random_test_channel;
use tswipt_core::{
    average_harvested_closed, average_harvested_mc, average_harvested_quadrature, ergodic_rate, integrate,
    rate_ci_explicit, rate_ci_generic, EhParams, InputDistribution, RateConfig, RngStream, TemperatureChannel,
    ThermalParams,
};

const SEED: u64 = 20_240_917;
const EXP: InputDistribution = InputDistribution::Exponential;
const UNI: InputDistribution = InputDistribution::Uniform;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

fn channels(count: u64, seed: u64) -> Vec<(ThermalParams, TemperatureChannel)> {
    (0..count)
        .map(|t| {
            let (p, r) = random_test_channel(&mut RngStream::new(seed, t));
            let ch = TemperatureChannel::build(&p, &r).expect("valid");
            (p, ch)
        })
        .collect()
}

fn inverse_identity() -> Outcome {
    let start = Instant::now();
    let worst = channels(200, SEED)
        .iter()
        .map(|(_, ch)| tswipt_core::channel::inverse_residual(ch.matrix_a(), ch.matrix_b()))
        .fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-10 && secs < 1.0,
        format!("max |AB - I| = {worst:.2e} (limit 1e-10), {secs:.3} s (limit 1 s)"),
    )
}

fn row_norms_vs_dense() -> Outcome {
    let mut worst: f64 = 0.0;
    for (_, ch) in channels(200, SEED) {
        let inv = ch.matrix_a().clone().try_inverse().expect("invertible");
        for (i, norm) in ch.row_norm_sq().iter().enumerate() {
            worst = worst.max(rel(*norm, inv.row(i).norm_squared()));
        }
    }
    outcome(worst <= 1e-10, format!("max relative error {worst:.2e} (limit 1e-10)"))
}

fn s_diagonal_and_log_det() -> Outcome {
    let (mut diag, mut logdet): (f64, f64) = (0.0, 0.0);
    for (p, ch) in channels(200, SEED) {
        let a = ch.matrix_a();
        let s = (a.transpose() * a).try_inverse().expect("invertible");
        for (i, norm) in ch.row_norm_sq().iter().enumerate() {
            diag = diag.max(rel(s[(i, i)], *norm));
        }
        let dense = 0.5 * ((0..ch.n()).map(|i| s[(i, i)].log2()).sum::<f64>() - s.determinant().log2());
        let closed = log_det_ratio_closed(ch.n(), p.beta);
        logdet = logdet.max((dense - closed).abs()).max((ch.log_det_ratio() - closed).abs());
    }
    outcome(
        diag <= 1e-10 && logdet <= 1e-9,
        format!("diag relative error {diag:.2e} (limit 1e-10), log-det abs error {logdet:.2e} (limit 1e-9)"),
    )
}

fn random_rate_cases(count: u64, seed: u64) -> Vec<(ThermalParams, tswipt_core::ChannelRealization, RateConfig)> {
    (0..count)
        .map(|t| {
            let mut stream = RngStream::new(seed, t);
            let (p, r) = random_test_channel(&mut stream);
            let e = 10f64.powf(-2.0 + 6.0 * stream.uniform());
            let cfg = RateConfig::new(e, 1.0, r.len()).expect("valid");
            (p, r, cfg)
        })
        .collect()
}

fn rate_forms() -> Outcome {
    let mut worst: f64 = 0.0;
    for (p, r, cfg) in random_rate_cases(1000, SEED + 1) {
        let ch = TemperatureChannel::build(&p, &r).expect("valid");
        for d in InputDistribution::ALL {
            worst = worst.max(rel(rate_ci_explicit(d, &p, &r, &cfg), rate_ci_generic(d, &ch, &cfg)));
        }
    }
    outcome(worst <= 1e-12, format!("max relative difference {worst:.2e} over 1000 channels (limit 1e-12)"))
}

fn input_ordering() -> Outcome {
    let cases = random_rate_cases(1000, SEED + 2);
    let violations = cases
        .iter()
        .filter(|(p, r, cfg)| !(rate_ci_explicit(EXP, p, r, cfg) > rate_ci_explicit(UNI, p, r, cfg)))
        .count();
    outcome(violations == 0, format!("{violations} of {} realizations violate exp > uni", cases.len()))
}

fn n_invariance() -> Outcome {
    let start = Instant::now();
    let params = ThermalParams::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for &e in &[1.0, 10.0, 100.0] {
        let r4 = ergodic_rate(EXP, &params, &RateConfig::new(e, 1.0, 4).unwrap(), 100_000, SEED).unwrap();
        let r6 = ergodic_rate(EXP, &params, &RateConfig::new(e, 1.0, 6).unwrap(), 100_000, SEED).unwrap();
        let allowed = 0.02f64.max(3.0 * r4.combined_std_error(&r6));
        let diff = (r4.mean - r6.mean).abs();
        let exact = ergodic_rate_quadrature(EXP, &params, &RateConfig::new(e, 1.0, 4).unwrap()).unwrap()
            - ergodic_rate_quadrature(EXP, &params, &RateConfig::new(e, 1.0, 6).unwrap()).unwrap();
        pass &= diff <= allowed;
        parts.push(format!("E={e}: |dR|={diff:.4} allowed {allowed:.4} exact {exact:.5}"));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 10.0;
    outcome(pass, format!("{}; {secs:.2} s (limit 10 s)", parts.join("; ")))
}

fn bound_validity() -> Outcome {
    let params = ThermalParams::default();
    let grid = PowerGrid::Spec(DEFAULT_RATE_GRID.into()).values().unwrap();
    let sub = BoundSettings::default();
    let min = BoundSettings {
        tuning: Tuning::Minimized,
        ..sub
    };
    let mut worst_margin = f64::INFINITY;
    let mut worst_per_use = f64::INFINITY;
    let mut min_excess = f64::NEG_INFINITY;
    for &n in &[4, 6] {
        for &e in &grid {
            let cfg = RateConfig::new(e, 1.0, n).unwrap();
            let rate = ergodic_rate(EXP, &params, &cfg, 10_000, SEED).unwrap();
            let b = ergodic_capacity_bound_detailed(&params, &cfg, 10_000, SEED, &sub).unwrap();
            worst_margin = worst_margin.min((b.unscaled.mean - rate.mean) / rate.combined_std_error(&b.unscaled));
            worst_per_use = worst_per_use.min((b.per_use.mean - rate.mean) / rate.combined_std_error(&b.per_use));
            let bs = ergodic_capacity_bound_detailed(&params, &cfg, 30, SEED, &sub).unwrap();
            let bm = ergodic_capacity_bound_detailed(&params, &cfg, 30, SEED, &min).unwrap();
            min_excess = min_excess.max(bm.unscaled.mean - bs.unscaled.mean);
        }
    }
    outcome(
        worst_margin >= -3.0 && worst_per_use >= -3.0 && min_excess <= 0.0,
        format!(
            "min (bound - rate) = {worst_margin:.1} se (per-use scaling {worst_per_use:.1} se, limit -3); \
             max (minimized - suboptimal) = {min_excess:.2e} bits (limit 0)"
        ),
    )
}

fn eh_closed_vs_quadrature() -> Outcome {
    let eh = EhParams::default();
    let mut worst: f64 = 0.0;
    let mut uncorrected = [0.0f64; 2];
    for (k, d) in InputDistribution::ALL.into_iter().enumerate() {
        for e in log_grid(0.1, 10.0, 25) {
            let q = average_harvested_quadrature(d, e, &eh, 1e-10).unwrap().value;
            worst = worst.max(rel(average_harvested_closed(d, e, &eh).unwrap().value, q));
            uncorrected[k] = uncorrected[k].max(rel(average_harvested_uncorrected(d, e, &eh).unwrap(), q));
        }
    }
    outcome(
        worst <= 1e-6,
        format!(
            "max relative error {worst:.2e} (limit 1e-6); uncorrected forms off by up to {:.1}% (exp), {:.1}% (uni)",
            100.0 * uncorrected[0],
            100.0 * uncorrected[1]
        ),
    )
}

fn eh_monte_carlo() -> Outcome {
    let start = Instant::now();
    let eh = EhParams::default();
    let mut worst: f64 = 0.0;
    for d in InputDistribution::ALL {
        for &e in &[0.5, 1.0, 2.0, 5.0] {
            let mc = average_harvested_mc(d, e, &eh, 1_000_000, SEED).unwrap();
            let q = average_harvested_quadrature(d, e, &eh, 1e-10).unwrap().value;
            worst = worst.max((mc.value - q).abs() / (mc.abs_error / 3.0));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 3.0 && secs < 20.0,
        format!("max |MC - quadrature| = {worst:.2} se (limit 3), {secs:.2} s (limit 20 s)"),
    )
}

fn crossover() -> Outcome {
    let eh = EhParams::default();
    let at = |d, e| average_harvested_closed(d, e, &eh).unwrap().value;
    let grid = log_grid(0.1, 10.0, 25);
    let low = grid.iter().copied().find(|&e| at(EXP, e) > at(UNI, e));
    let high = grid.iter().rev().copied().find(|&e| at(UNI, e) > at(EXP, e));
    match (low, high) {
        (Some(l), Some(h)) => outcome(l < h, format!("exp ahead at E = {l:.3} mW, uni ahead at E = {h:.3} mW")),
        _ => outcome(false, format!("no crossover on the grid (exp ahead: {low:?}, uni ahead: {high:?})")),
    }
}

fn saturation() -> Outcome {
    let eh = EhParams::default();
    let mut lows = Vec::new();
    let mut highs = Vec::new();
    for d in InputDistribution::ALL {
        lows.push(average_harvested_closed(d, 1e-4, &eh).unwrap().value);
        lows.push(average_harvested_quadrature(d, 1e-4, &eh, 1e-10).unwrap().value);
        highs.push(average_harvested_closed(d, 1e3, &eh).unwrap().value);
        highs.push(average_harvested_quadrature(d, 1e3, &eh, 1e-10).unwrap().value);
    }
    let low = lows.iter().copied().fold(0.0, f64::max);
    let dev = highs.iter().map(|v| rel(*v, 1.29)).fold(0.0, f64::max);
    outcome(
        low < 1e-6 && dev <= 0.02,
        format!("max value at 1e-4 mW {low:.2e} (limit 1e-6); max deviation from 1.29 mW at 1e3 mW {:.2}%", 100.0 * dev),
    )
}

fn special_functions() -> Outcome {
    let mut worst = [0.0f64; 4];
    let grid = log_grid(1e-3, 50.0, 60);
    for &x in &log_grid(1e-3, 35.0, 60) {
        worst[0] = worst[0].max(rel(specfun::q_function(x), oracle::q_function(x).unwrap()));
    }
    for &x in &grid {
        worst[1] = worst[1].max(rel(specfun::bessel_k(1, x).unwrap(), oracle::bessel_k(1, x).unwrap()));
        worst[2] = worst[2].max(rel(specfun::bessel_k(2, x).unwrap(), oracle::bessel_k(2, x).unwrap()));
        worst[3] = worst[3].max(rel(
            specfun::upper_incomplete_gamma(0.0, x).unwrap(),
            oracle::upper_incomplete_gamma(0.0, x).unwrap(),
        ));
    }
    let max = worst.iter().copied().fold(0.0, f64::max);
    outcome(
        max <= 1e-10,
        format!(
            "60-point grids: Q {:.1e}, K1 {:.1e}, K2 {:.1e}, Gamma(0,.) {:.1e} (limit 1e-10)",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn run_bin(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_tswipt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut digests: Vec<(String, Vec<u8>)> = Vec::new();
    for threads in ["1", "4", "8"] {
        for (cmd, extra) in [
            ("rate-sweep", vec!["--trials", "2000", "--baseline"]),
            ("eh-sweep", vec!["--power-grid", "log:0.1:10:9", "--baseline"]),
        ] {
            let out = dir.path().join(format!("{cmd}-{threads}.csv"));
            let mut args = vec![cmd, "--seed", "7", "--threads", threads, "--out", out.to_str().unwrap()];
            args.extend(extra);
            let status = run_bin(&args).status;
            if !status.success() {
                return outcome(false, format!("{cmd} with {threads} threads exited with {status}"));
            }
            digests.push((format!("{cmd}/{threads}"), std::fs::read(&out).unwrap()));
        }
    }
    let same = |cmd: &str| {
        let files: Vec<&Vec<u8>> = digests.iter().filter(|(k, _)| k.starts_with(cmd)).map(|(_, v)| v).collect();
        files.windows(2).all(|w| w[0] == w[1])
    };
    let pass = same("rate-sweep") && same("eh-sweep");
    outcome(pass, format!("rate and energy CSVs byte-identical across 1, 4, 8 threads: {pass}"))
}

fn validate_suite() -> Outcome {
    let start = Instant::now();
    let out = run_bin(&["validate"]);
    let secs = start.elapsed().as_secs_f64();
    let stdout = String::from_utf8_lossy(&out.stdout);
    let summary = stdout.lines().last().unwrap_or("").to_string();
    outcome(
        out.status.success() && secs < 60.0,
        format!("{summary}; exit {}, {secs:.2} s (limit 60 s)", out.status.code().unwrap_or(-1)),
    )
}

fn main() {
    // Density sanity before anything depends on it.
    let norm = integrate(|x| received_power_pdf(EXP, 1.0, x).unwrap(), 0.0, f64::INFINITY, 1e-10)
        .unwrap()
        .value;
    assert!((norm - 1.0).abs() < 1e-8);

    let criteria: [Criterion; 14] = [
        ("matrix inverse identity", inverse_identity),
        ("row norms vs dense inversion", row_norms_vs_dense),
        ("S diagonal identity and log-det ratio", s_diagonal_and_log_det),
        ("rate form equivalence", rate_forms),
        ("exponential input beats uniform", input_ordering),
        ("ergodic rate N-invariance", n_invariance),
        ("capacity bound validity", bound_validity),
        ("harvested energy closed form vs quadrature", eh_closed_vs_quadrature),
        ("harvested energy Monte Carlo", eh_monte_carlo),
        ("harvested energy crossover", crossover),
        ("harvested energy saturation limits", saturation),
        ("special function fidelity", special_functions),
        ("CSV determinism across thread counts", determinism),
        ("validate suite runtime", validate_suite),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
