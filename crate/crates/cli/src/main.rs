//! `fluid-mimo` experiment runner.
//!
//! ```text
//! fluid-mimo <convergence|snr|region> --config <path> --out <csv> [--seed <u64>] [--trials <n>] [--jobs <n>]
//! ```
//!
//! The worker count defaults to the number of CPUs and is capped by
//! `FLUID_MIMO_MAX_JOBS` when set.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use fluid_mimo::experiments::config::{
    parse_config, parse_config_str, ExperimentKind, ExperimentSpec,
};
use fluid_mimo::experiments::runner::{run_convergence, run_region_sweep, run_snr_sweep};

const JOBS_ENV: &str = "FLUID_MIMO_MAX_JOBS";

#[derive(Parser, Debug)]
#[command(
    name = "fluid-mimo",
    version,
    about = "Fluid-antenna MIMO rate experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Objective per outer iteration for each power level and seed.
    Convergence(RunArgs),
    /// Trial-averaged rate of each design versus SNR.
    Snr(RunArgs),
    /// Trial-averaged rate of each design versus region size.
    Region(RunArgs),
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// Experiment config (`key = value` lines). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Angle realizations per point (overrides the config).
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Also write one row per design, point and trial (sweeps only).
    #[arg(long)]
    trials_out: Option<PathBuf>,
    /// Suppress the summary on stderr.
    #[arg(long)]
    quiet: bool,
}

fn worker_count(requested: Option<usize>) -> Result<usize> {
    let mut jobs =
        requested.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if let Ok(cap) = std::env::var(JOBS_ENV) {
        let cap: usize = cap
            .trim()
            .parse()
            .with_context(|| format!("{JOBS_ENV} must be a positive integer, got `{cap}`"))?;
        if cap == 0 {
            bail!("{JOBS_ENV} must be >= 1");
        }
        jobs = jobs.min(cap);
    }
    if jobs == 0 {
        bail!("--jobs must be >= 1");
    }
    Ok(jobs)
}

fn load_spec(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentSpec> {
    let mut spec = match &args.config {
        Some(path) => {
            parse_config(path).with_context(|| format!("invalid config {}", path.display()))?
        }
        None => parse_config_str("")?,
    };
    spec.experiment = Some(kind);
    if let Some(seed) = args.seed {
        spec.base_seed = seed;
    }
    if let Some(trials) = args.trials {
        spec.num_angle_trials = trials;
    }
    if let Some(out) = &args.out {
        spec.output = Some(out.clone());
    }
    spec.validate()?;
    Ok(spec)
}

/// Renders fully in memory, then writes, so a failed run leaves no partial file.
fn write_atomically(
    path: &Path,
    render: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
) -> Result<()> {
    let mut buf = Vec::new();
    render(&mut buf)?;
    let mut out = BufWriter::new(
        fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    );
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

fn run(kind: ExperimentKind, args: RunArgs) -> Result<()> {
    let spec = load_spec(kind, &args)?;
    let out = spec
        .output
        .clone()
        .context("no output path: pass --out or set `output` in the config")?;
    let jobs = worker_count(args.jobs)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;

    match kind {
        ExperimentKind::Convergence => {
            let res = pool.install(|| run_convergence(&spec))?;
            write_atomically(&out, |b| res.write_csv(b))?;
            if !args.quiet {
                let converged = res.runs.iter().filter(|r| r.converged).count();
                eprintln!(
                    "{} runs, {converged} converged; wrote {}",
                    res.runs.len(),
                    out.display()
                );
            }
        }
        ExperimentKind::SnrSweep | ExperimentKind::RegionSweep => {
            let res = pool.install(|| match kind {
                ExperimentKind::SnrSweep => run_snr_sweep(&spec),
                _ => run_region_sweep(&spec),
            })?;
            write_atomically(&out, |b| res.write_csv(b))?;
            if let Some(path) = &args.trials_out {
                write_atomically(path, |b| res.write_trials_csv(b))?;
            }
            if !args.quiet {
                for r in &res.rows {
                    eprintln!(
                        "{:>4} snr={:>5} A/lambda={:>4}  rate={:.4} +- {:.4}  bound={:.4}",
                        r.design.name(),
                        r.snr_db,
                        r.a_over_lambda,
                        r.mean_rate,
                        r.std_error,
                        r.upper_bound
                    );
                }
                eprintln!("wrote {}", out.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Convergence(a) => (ExperimentKind::Convergence, a),
        Command::Snr(a) => (ExperimentKind::SnrSweep, a),
        Command::Region(a) => (ExperimentKind::RegionSweep, a),
    };
    match run(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
