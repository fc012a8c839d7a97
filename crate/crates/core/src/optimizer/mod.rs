//! Alternating maximization of the rate bound over the transmit covariance
//! and the transmit/receive antenna positions.

mod alternating;
mod covariance;
mod subproblem;

use std::io::Write;

pub(crate) use alternating::centred_line;
pub use alternating::{
    alternate_optimize, alternate_optimize_sides, default_initial_layout, initial_positions,
    PositionUpdates,
};
pub use covariance::update_covariance;
pub use subproblem::{
    curvature_bound, position_gradient, position_objective, receive_coefficient_matrix,
    solve_position_step, transmit_coefficient_matrix, PositionSubproblem, MIN_CURVATURE,
};

use crate::error::{Error, Result};
use crate::model::{AntennaLayout, TransmitCovariance};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Outer-loop threshold on `|R_i - R_{i-1}|`, bits/s/Hz.
    pub epsilon: f64,
    pub max_outer_iters: usize,
    /// Cap on minorization steps per position subproblem.
    pub max_inner_iters: usize,
    /// Inner loop stops once a step moves less than this (meters).
    pub inner_tolerance: f64,
    /// Multiplier (>= 1) on the analytic curvature bound.
    pub hessian_bound_safety: f64,
    /// Points per axis of the coarse feasible grid whose local maxima seed
    /// extra ascents in each position subproblem; values below 2 disable it.
    pub candidate_grid: usize,
}

impl SolverConfig {
    pub const DEFAULT_CANDIDATE_GRID: usize = 41;
    /// Coarse-grid local maxima used as extra starting points.
    pub const GRID_STARTS: usize = 4;

    pub fn for_wavelength(wavelength: f64) -> Self {
        SolverConfig {
            epsilon: 1e-3,
            max_outer_iters: 100,
            max_inner_iters: 200,
            inner_tolerance: 1e-6 * wavelength,
            hessian_bound_safety: 1.0,
            candidate_grid: Self::DEFAULT_CANDIDATE_GRID,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::param("epsilon", "must be > 0"));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::param("max_outer_iters", "must be >= 1"));
        }
        if self.max_inner_iters == 0 {
            return Err(Error::param("max_inner_iters", "must be >= 1"));
        }
        if !(self.inner_tolerance.is_finite() && self.inner_tolerance > 0.0) {
            return Err(Error::param("inner_tolerance", "must be finite and > 0"));
        }
        if !(self.hessian_bound_safety.is_finite() && self.hessian_bound_safety >= 1.0) {
            return Err(Error::param(
                "hessian_bound_safety",
                "must be finite and >= 1",
            ));
        }
        Ok(())
    }
}

/// Result of one alternating-optimization run.
#[derive(Clone, Debug)]
pub struct SolveTrace {
    /// `R_bar` before the first pass followed by the value after each pass.
    pub objective_per_outer_iter: Vec<f64>,
    pub final_layout: AntennaLayout,
    pub final_q: TransmitCovariance,
    pub outer_iters_used: usize,
    /// Whether the threshold was met before `max_outer_iters`.
    pub converged: bool,
}

impl SolveTrace {
    pub fn final_objective(&self) -> f64 {
        *self
            .objective_per_outer_iter
            .last()
            .expect("trace holds the initial objective")
    }

    /// Largest drop between consecutive objective values (0 for a monotone trace).
    pub fn max_decrease(&self) -> f64 {
        self.objective_per_outer_iter
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(0.0, f64::max)
    }

    /// Writes `iteration,objective` rows with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iteration,objective")?;
        for (i, r) in self.objective_per_outer_iter.iter().enumerate() {
            writeln!(out, "{i},{r}")?;
        }
        Ok(())
    }
}
