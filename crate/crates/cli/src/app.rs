use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use tswipt_core::{run_validate, InputDistribution, ValidateOptions};

use crate::config::{parse_list, BoundMode, PowerGrid, SweepKind, SweepSpec};
use crate::error::CliError;
use crate::output::write_rows;
use crate::sweep::{normalize_distributions, run_energy_sweep, run_rate_sweep, run_trace, write_trace};

#[derive(Debug, Parser)]
#[command(name = "tswipt", version, about = "Rates, capacity bounds and harvested energy of a temperature-modulated SWIPT link")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ergodic rates, capacity bound and optional power-splitting baseline.
    RateSweep(SweepArgs),
    /// Average harvested energy by closed form, quadrature and Monte Carlo.
    EhSweep(SweepArgs),
    /// One block of the heat recursion.
    Trace(TraceArgs),
    /// Run every internal consistency check.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// JSON configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Channel uses per block, comma separated.
    #[arg(long, value_name = "LIST")]
    pub n: Option<String>,
    /// log:FROM:TO:POINTS, lin:FROM:TO:POINTS, db:FROM:TO:POINTS or list:V1,V2,...
    #[arg(long, value_name = "SPEC")]
    pub power_grid: Option<String>,
    /// Input distributions, comma separated (exp, uni).
    #[arg(long, value_name = "LIST")]
    pub dists: Option<String>,
    /// off, sub or min.
    #[arg(long, value_name = "MODE")]
    pub bound: Option<String>,
    /// Add power-splitting baseline rows.
    #[arg(long)]
    pub baseline: bool,
    /// CSV destination; stdout if absent. A resolved config is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    /// Drop the thermometer noise.
    #[arg(long)]
    pub zero_noise: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// Write the machine-readable report here as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Negate B's subdiagonal before the inverse check (the check must fail).
    #[arg(long, hide = true)]
    pub flip_b_subdiagonal: bool,
}

/// Loads the JSON config, if any, and applies flag overrides.
pub fn resolve_spec(args: &SweepArgs) -> Result<SweepSpec, CliError> {
    let mut spec = match &args.config {
        Some(path) => SweepSpec::from_json_file(path)?,
        None => SweepSpec::default(),
    };
    let flag = |name: &str, e: String| CliError::Config(format!("--{name}: {e}"));
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(trials) = args.trials {
        spec.trials = trials;
    }
    if let Some(n) = &args.n {
        spec.n_list = parse_list(n).map_err(|e| flag("n", e))?;
    }
    if let Some(grid) = &args.power_grid {
        let grid = PowerGrid::Spec(grid.clone());
        grid.values().map_err(|e| flag("power-grid", e))?;
        spec.power_grid = Some(grid);
    }
    if let Some(d) = &args.dists {
        spec.distributions = parse_list::<InputDistribution>(d).map_err(|e| flag("dists", e))?;
    }
    if let Some(b) = &args.bound {
        spec.bound = b.parse::<BoundMode>().map_err(|e| flag("bound", e))?;
    }
    if args.baseline {
        spec.baseline = true;
    }
    normalize_distributions(&mut spec.distributions);
    Ok(spec)
}

/// `rates.csv` gets `rates.config.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("config.json")
}

fn write_sidecar(out: &Path, spec: &SweepSpec, kind: SweepKind) -> Result<(), CliError> {
    let resolved = SweepSpec {
        power_grid: Some(PowerGrid::Values(spec.grid_for(kind).values().map_err(CliError::Config)?)),
        ..spec.clone()
    };
    let text = serde_json::to_string_pretty(&resolved).map_err(|e| CliError::Output(e.to_string()))?;
    std::fs::write(sidecar_path(out), text + "\n")?;
    Ok(())
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
            CliError::Output(format!("{}: {e}", path.display()))
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Config("--threads: must be >= 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn sweep(args: &SweepArgs, kind: SweepKind) -> Result<i32, CliError> {
    let spec = resolve_spec(args)?;
    spec.validate(kind)?;
    let rows = with_threads(args.threads, || match kind {
        SweepKind::Energy => run_energy_sweep(&spec),
        _ => run_rate_sweep(&spec),
    })??;
    write_rows(sink(&args.out)?, &rows)?;
    if let Some(out) = &args.out {
        write_sidecar(out, &spec, kind)?;
    }
    Ok(0)
}

fn trace(args: &TraceArgs) -> Result<i32, CliError> {
    let mut spec = resolve_spec(&args.sweep)?;
    if args.zero_noise {
        spec.trace.zero_noise = true;
    }
    if args.sweep.power_grid.is_some() {
        return Err(CliError::Config("--power-grid: not used by trace (set trace.mean_power)".into()));
    }
    let (t, powers, gains) = with_threads(args.sweep.threads, || run_trace(&spec))??;
    write_trace(sink(&args.sweep.out)?, &t, &powers, &gains)?;
    if let Some(out) = &args.sweep.out {
        write_sidecar(out, &spec, SweepKind::Trace)?;
    }
    Ok(0)
}

fn validate(args: &ValidateArgs) -> Result<i32, CliError> {
    let opts = ValidateOptions {
        flip_b_subdiagonal: args.flip_b_subdiagonal,
    };
    let report = with_threads(args.threads, || run_validate(opts))?;
    let mut stdout = io::stdout().lock();
    for c in &report.checks {
        let limit = c.threshold.map(|t| format!("<= {t:.3e}")).unwrap_or_else(|| "report".into());
        writeln!(
            stdout,
            "{} {:<38} {:>12.4e} {:<12} {:>7.2}s  {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            limit,
            c.seconds,
            c.detail
        )?;
    }
    let failed = report.failures().count();
    writeln!(
        stdout,
        "{} of {} checks passed in {:.2}s",
        report.checks.len() - failed,
        report.checks.len(),
        report.seconds
    )?;
    if let Some(out) = &args.out {
        let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Output(e.to_string()))?;
        std::fs::write(out, text + "\n")?;
    }
    Ok(if report.all_passed() { 0 } else { 1 })
}

/// Runs a parsed command and returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::RateSweep(a) => sweep(a, SweepKind::Rate),
        Command::EhSweep(a) => sweep(a, SweepKind::Energy),
        Command::Trace(a) => trace(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("tswipt: {e}");
            e.exit_code()
        }
    }
}
