//! Convergence, SNR and region experiments with CSV output.
//!
//! Trials run in parallel on the current rayon pool; results are collected
//! and written in a fixed order, so the CSV bytes depend only on the spec.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evaluation::{evaluate_design, BaselineKind, DesignScenario};
use crate::experiments::config::ExperimentSpec;
use crate::model::{dbm_to_mw, PathAngles, SystemParams};
use crate::optimizer::{alternate_optimize, default_initial_layout};
use crate::rng::{substream, trial_seed, ANGLE_STREAM};

/// Slack allowed on the per-pass objective decrease.
pub const MONOTONE_SLACK: f64 = 1e-9;
/// Monte Carlo rates may exceed the bound by at most this many standard errors.
pub const JENSEN_SIGMAS: f64 = 3.0;

pub const CONVERGENCE_HEADER: &str = "pmax_dbm,seed,iteration,objective";
pub const SWEEP_HEADER: &str =
    "design,snr_db,a_over_lambda,seed,trials,mean_rate,std_error,upper_bound";
pub const TRIAL_HEADER: &str = "design,snr_db,a_over_lambda,seed,mean_rate,std_error,upper_bound";

fn trial_angles(spec: &ExperimentSpec, seed: u64) -> PathAngles {
    match &spec.scenario.angles {
        Some(a) => a.clone(),
        None => PathAngles::random(
            spec.scenario.num_tx_paths,
            spec.scenario.num_rx_paths,
            &mut substream(seed, ANGLE_STREAM),
        ),
    }
}

fn finite(v: f64, what: &'static str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(what))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRun {
    pub pmax_dbm: f64,
    pub seed: u64,
    pub objective: Vec<f64>,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceResult {
    pub runs: Vec<ConvergenceRun>,
}

impl ConvergenceResult {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CONVERGENCE_HEADER}")?;
        for run in &self.runs {
            for (i, r) in run.objective.iter().enumerate() {
                writeln!(out, "{},{},{},{}", run.pmax_dbm, run.seed, i, r)?;
            }
        }
        Ok(())
    }
}

/// Traces the outer loop of the full FA design for every power level in
/// `pmax_grid_dbm` and every trial seed.
pub fn run_convergence(spec: &ExperimentSpec) -> Result<ConvergenceResult> {
    spec.validate()?;
    let sc = &spec.scenario;
    let jobs: Vec<(f64, u64)> = spec
        .pmax_grid_dbm
        .iter()
        .flat_map(|&p| {
            (0..spec.num_angle_trials as u64).map(move |k| (p, trial_seed(spec.base_seed, k)))
        })
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(pmax_dbm, seed)| {
            let params = SystemParams::new(
                sc.wavelength,
                dbm_to_mw(sc.noise_dbm),
                dbm_to_mw(pmax_dbm),
                sc.num_tx_paths,
                sc.num_rx_paths,
                sc.path_gain_variance,
            )?;
            let angles = trial_angles(spec, seed);
            let layout = default_initial_layout(
                sc.num_tx,
                sc.num_rx,
                &params,
                sc.half_width(sc.region_wavelengths),
                sc.min_spacing(),
            )?;
            let trace = alternate_optimize(&layout, &angles, &params, &spec.solver)?;
            if trace.max_decrease() > MONOTONE_SLACK {
                return Err(Error::Config(format!(
                    "objective decreased by {} (pmax {pmax_dbm} dBm, seed {seed})",
                    trace.max_decrease()
                )));
            }
            for &r in &trace.objective_per_outer_iter {
                finite(r, "objective trace")?;
            }
            Ok(ConvergenceRun {
                pmax_dbm,
                seed,
                objective: trace.objective_per_outer_iter,
                converged: trace.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceResult { runs })
}

/// One design evaluated on one trial at one sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub design: BaselineKind,
    pub snr_db: f64,
    pub a_over_lambda: f64,
    pub seed: u64,
    pub mean_rate: f64,
    pub std_error: f64,
    pub upper_bound: f64,
    pub outer_iters: usize,
}

/// Trial-averaged curve point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub design: BaselineKind,
    pub snr_db: f64,
    pub a_over_lambda: f64,
    pub seed: u64,
    pub trials: usize,
    /// Mean over trials of the Monte Carlo ergodic rate.
    pub mean_rate: f64,
    /// Standard error of `mean_rate` across trials.
    pub std_error: f64,
    /// Mean over trials of the bound at the optimized design.
    pub upper_bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub trials: Vec<TrialRecord>,
}

impl SweepResult {
    pub fn row(&self, design: BaselineKind, snr_db: f64, a_over_lambda: f64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.design == design && r.snr_db == snr_db && r.a_over_lambda == a_over_lambda)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{SWEEP_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.design,
                r.snr_db,
                r.a_over_lambda,
                r.seed,
                r.trials,
                r.mean_rate,
                r.std_error,
                r.upper_bound
            )?;
        }
        Ok(())
    }

    pub fn write_trials_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{TRIAL_HEADER}")?;
        for r in &self.trials {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.design,
                r.snr_db,
                r.a_over_lambda,
                r.seed,
                r.mean_rate,
                r.std_error,
                r.upper_bound
            )?;
        }
        Ok(())
    }
}

/// Sweep point `(snr_db, a_over_lambda)`.
type Point2 = (f64, f64);

fn run_sweep(spec: &ExperimentSpec, points: &[Point2]) -> Result<SweepResult> {
    spec.validate()?;
    let sc = &spec.scenario;
    let trials: Vec<u64> = (0..spec.num_angle_trials as u64)
        .map(|k| trial_seed(spec.base_seed, k))
        .collect();

    // Per trial: all points x designs, in grid order.
    let per_trial = trials
        .par_iter()
        .map(|&seed| {
            let angles = trial_angles(spec, seed);
            let mut out = Vec::with_capacity(points.len() * spec.designs.len());
            for &(snr_db, a_over_lambda) in points {
                let params = sc.params_at_snr(snr_db)?;
                let scenario = DesignScenario {
                    num_tx: sc.num_tx,
                    num_rx: sc.num_rx,
                    angles: &angles,
                    params: &params,
                    region_half_width: sc.half_width(a_over_lambda),
                    min_spacing: sc.min_spacing(),
                };
                for &design in &spec.designs {
                    let eval =
                        evaluate_design(design, &scenario, &spec.solver, spec.mc_samples, seed)?;
                    if eval.trace.max_decrease() > MONOTONE_SLACK {
                        return Err(Error::Config(format!(
                            "{design} objective decreased by {} (seed {seed})",
                            eval.trace.max_decrease()
                        )));
                    }
                    let est = eval.estimate;
                    if est.mean_rate > eval.upper_bound + JENSEN_SIGMAS * est.std_error + 1e-12 {
                        return Err(Error::Config(format!(
                            "{design}: Monte Carlo rate {} exceeds the bound {} (seed {seed})",
                            est.mean_rate, eval.upper_bound
                        )));
                    }
                    out.push(TrialRecord {
                        design,
                        snr_db,
                        a_over_lambda,
                        seed,
                        mean_rate: finite(est.mean_rate, "rate")?,
                        std_error: finite(est.std_error, "std error")?,
                        upper_bound: finite(eval.upper_bound, "upper bound")?,
                        outer_iters: eval.trace.outer_iters_used,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let per_point = points.len() * spec.designs.len();
    let t = trials.len() as f64;
    let mut rows = Vec::with_capacity(per_point);
    for idx in 0..per_point {
        let first = &per_trial[0][idx];
        let rates: Vec<f64> = per_trial.iter().map(|v| v[idx].mean_rate).collect();
        let mean = rates.iter().sum::<f64>() / t;
        let std_error = if trials.len() > 1 {
            let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (t - 1.0);
            (var / t).sqrt()
        } else {
            first.std_error
        };
        let upper_bound = per_trial.iter().map(|v| v[idx].upper_bound).sum::<f64>() / t;
        rows.push(SweepRow {
            design: first.design,
            snr_db: first.snr_db,
            a_over_lambda: first.a_over_lambda,
            seed: spec.base_seed,
            trials: trials.len(),
            mean_rate: mean,
            std_error,
            upper_bound,
        });
    }
    let trials = per_trial.into_iter().flatten().collect();
    Ok(SweepResult { rows, trials })
}

/// Rate of each design versus SNR at region size `A`.
pub fn run_snr_sweep(spec: &ExperimentSpec) -> Result<SweepResult> {
    let a = spec.scenario.region_wavelengths;
    let points: Vec<Point2> = spec.snr_grid_db.iter().map(|&s| (s, a)).collect();
    run_sweep(spec, &points)
}

/// Rate of each design versus region size `A / lambda` at `region_snr_db`.
pub fn run_region_sweep(spec: &ExperimentSpec) -> Result<SweepResult> {
    let points: Vec<Point2> = spec
        .region_grid
        .iter()
        .map(|&a| (spec.region_snr_db, a))
        .collect();
    run_sweep(spec, &points)
}
