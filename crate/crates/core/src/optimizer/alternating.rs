use crate::error::{Error, Result};
use crate::model::{
    field_matrix, field_vector, path_power, upper_bound_from_fields, AntennaLayout, PathAngles,
    Point, Side, SystemParams,
};
use crate::optimizer::subproblem::{
    receive_coefficient_matrix, solve_position_step, transmit_coefficient_matrix,
    PositionSubproblem,
};
use crate::optimizer::{update_covariance, SolveTrace, SolverConfig};

/// Which antenna sides the outer loop is allowed to move.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PositionUpdates {
    pub receive: bool,
    pub transmit: bool,
}

impl PositionUpdates {
    pub const ALL: Self = PositionUpdates {
        receive: true,
        transmit: true,
    };
    pub const RECEIVE_ONLY: Self = PositionUpdates {
        receive: true,
        transmit: false,
    };
    pub const NONE: Self = PositionUpdates {
        receive: false,
        transmit: false,
    };
}

/// Runs the full alternating optimization (covariance, receive positions,
/// transmit positions) from `initial`.
pub fn alternate_optimize(
    initial: &AntennaLayout,
    angles: &PathAngles,
    params: &SystemParams,
    config: &SolverConfig,
) -> Result<SolveTrace> {
    alternate_optimize_sides(initial, angles, params, config, PositionUpdates::ALL)
}

/// Alternating optimization with a subset of position updates enabled.
///
/// Every outer pass updates `Q` in closed form, then each enabled receive
/// antenna in index order, then each enabled transmit antenna in index
/// order. The objective is always evaluated with the covariance that is
/// optimal for the current transmit layout, so each pass is non-decreasing.
pub fn alternate_optimize_sides(
    initial: &AntennaLayout,
    angles: &PathAngles,
    params: &SystemParams,
    config: &SolverConfig,
    updates: PositionUpdates,
) -> Result<SolveTrace> {
    params.validate()?;
    angles.validate()?;
    config.validate()?;
    initial.validate()?;
    if angles.num_tx_paths() != params.num_tx_paths || angles.num_rx_paths() != params.num_rx_paths
    {
        return Err(Error::DimensionMismatch {
            context: "path angles",
            expected: format!(
                "{} tx / {} rx paths",
                params.num_tx_paths, params.num_rx_paths
            ),
            found: format!(
                "{} tx / {} rx paths",
                angles.num_tx_paths(),
                angles.num_rx_paths()
            ),
        });
    }

    let mut layout = initial.clone();
    let mut g = field_matrix(&layout.tx_positions, angles, Side::Transmit, params);
    let mut f = field_matrix(&layout.rx_positions, angles, Side::Receive, params);
    let mut q = update_covariance(&g, params.power_budget)?;
    let mut objective = vec![upper_bound_from_fields(&g, &f, &q, params)?];
    let mut converged = false;
    let mut iters = 0;

    while iters < config.max_outer_iters {
        iters += 1;
        q = update_covariance(&g, params.power_budget)?;
        let a = params.path_gain_variance / params.noise_power * path_power(&g, &q);

        if updates.receive {
            for m in 0..layout.num_rx() {
                let sub = PositionSubproblem {
                    side: Side::Receive,
                    coefficient_matrix: receive_coefficient_matrix(&f, m, a.max(0.0))?,
                    fixed_positions: others(&layout.rx_positions, m),
                    current_position: layout.rx_positions[m],
                    region_half_width: layout.region_half_width,
                    min_spacing: layout.min_spacing,
                };
                let next = solve_position_step(&sub, angles, params, config)?;
                layout.rx_positions[m] = next;
                f.set_column(m, &field_vector(next, angles, Side::Receive, params));
            }
        }

        if updates.transmit {
            for n in 0..layout.num_tx() {
                let sub = PositionSubproblem {
                    side: Side::Transmit,
                    coefficient_matrix: transmit_coefficient_matrix(&g, n)?,
                    fixed_positions: others(&layout.tx_positions, n),
                    current_position: layout.tx_positions[n],
                    region_half_width: layout.region_half_width,
                    min_spacing: layout.min_spacing,
                };
                let next = solve_position_step(&sub, angles, params, config)?;
                layout.tx_positions[n] = next;
                g.set_column(n, &field_vector(next, angles, Side::Transmit, params));
            }
        }

        q = update_covariance(&g, params.power_budget)?;
        let current = upper_bound_from_fields(&g, &f, &q, params)?;
        let previous = *objective.last().expect("non-empty");
        objective.push(current);
        if (current - previous).abs() <= config.epsilon {
            converged = true;
            break;
        }
    }

    Ok(SolveTrace {
        objective_per_outer_iter: objective,
        final_layout: layout,
        final_q: q,
        outer_iters_used: iters,
        converged,
    })
}

fn others(points: &[Point], skip: usize) -> Vec<Point> {
    points
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != skip)
        .map(|(_, p)| *p)
        .collect()
}

/// Starting positions for `n` antennas: a centred uniform linear array along
/// x with spacing `max(lambda / 2, min_spacing)`, or a centred square-ish
/// grid when the array does not fit the region.
pub fn initial_positions(
    n: usize,
    wavelength: f64,
    half_width: f64,
    min_spacing: f64,
) -> Result<Vec<Point>> {
    if n == 0 {
        return Err(Error::param("antenna count", "must be >= 1"));
    }
    let spacing = (wavelength / 2.0).max(min_spacing);
    let span = (n - 1) as f64 * spacing;
    if span <= 2.0 * half_width + 1e-12 {
        return Ok(centred_line(n, spacing));
    }
    let cols = (n as f64).sqrt().ceil() as usize;
    let rows = n.div_ceil(cols);
    let widest = (cols.max(rows) - 1) as f64;
    let grid_spacing = spacing.min(2.0 * half_width / widest);
    if grid_spacing < min_spacing - 1e-12 {
        return Err(Error::Config(format!(
            "{n} antennas with spacing {min_spacing} do not fit a region of half-width {half_width}"
        )));
    }
    let x0 = -((cols - 1) as f64) * grid_spacing / 2.0;
    let y0 = -((rows - 1) as f64) * grid_spacing / 2.0;
    Ok((0..n)
        .map(|i| {
            Point::new(
                x0 + (i % cols) as f64 * grid_spacing,
                y0 + (i / cols) as f64 * grid_spacing,
            )
        })
        .collect())
}

pub(crate) fn centred_line(n: usize, spacing: f64) -> Vec<Point> {
    let mid = (n - 1) as f64 / 2.0;
    (0..n)
        .map(|i| Point::new((i as f64 - mid) * spacing, 0.0))
        .collect()
}

/// Layout used to start the optimizer when none is supplied.
pub fn default_initial_layout(
    num_tx: usize,
    num_rx: usize,
    params: &SystemParams,
    half_width: f64,
    min_spacing: f64,
) -> Result<AntennaLayout> {
    let layout = AntennaLayout {
        tx_positions: initial_positions(num_tx, params.wavelength, half_width, min_spacing)?,
        rx_positions: initial_positions(num_rx, params.wavelength, half_width, min_spacing)?,
        region_half_width: half_width,
        min_spacing,
    };
    layout.validate()?;
    Ok(layout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn line_layout_centred() {
        let pts = initial_positions(4, 1.5, 2.25, 0.75).unwrap();
        let xs: Vec<f64> = pts.iter().map(|p| p.x).collect();
        assert_eq!(xs, vec![-1.125, -0.375, 0.375, 1.125]);
        assert!(pts.iter().all(|p| p.y == 0.0));
    }

    #[test]
    fn grid_fallback_when_line_too_long() {
        // 4 antennas need 2.25 m on a line; region is 1.5 m wide.
        let pts = initial_positions(4, 1.5, 0.75, 0.75).unwrap();
        let layout = AntennaLayout {
            tx_positions: pts.clone(),
            rx_positions: pts,
            region_half_width: 0.75,
            min_spacing: 0.75,
        };
        layout.validate().unwrap();
        assert!(initial_positions(4, 1.5, 0.3, 0.75).is_err());
    }

    #[test]
    fn infinite_threshold_runs_one_pass() {
        let params = SystemParams::reference(15.0);
        let angles = PathAngles::random(3, 3, &mut substream(5, 0));
        let layout = default_initial_layout(4, 4, &params, 2.25, 0.75).unwrap();
        let mut cfg = SolverConfig::for_wavelength(params.wavelength);
        cfg.epsilon = f64::INFINITY;
        let trace = alternate_optimize(&layout, &angles, &params, &cfg).unwrap();
        assert_eq!(trace.outer_iters_used, 1);
        assert_eq!(trace.objective_per_outer_iter.len(), 2);
        assert!(trace.converged);
    }

    #[test]
    fn infeasible_start_rejected() {
        let params = SystemParams::reference(15.0);
        let angles = PathAngles::random(3, 3, &mut substream(6, 0));
        let mut layout = default_initial_layout(2, 2, &params, 2.25, 0.75).unwrap();
        layout.rx_positions[1] = layout.rx_positions[0];
        let cfg = SolverConfig::for_wavelength(params.wavelength);
        assert!(matches!(
            alternate_optimize(&layout, &angles, &params, &cfg),
            Err(Error::InfeasibleLayout(_))
        ));
    }

    #[test]
    fn mismatched_angles_rejected() {
        let params = SystemParams::reference(15.0);
        let angles = PathAngles::random(2, 3, &mut substream(7, 0));
        let layout = default_initial_layout(2, 2, &params, 2.25, 0.75).unwrap();
        let cfg = SolverConfig::for_wavelength(params.wavelength);
        assert!(matches!(
            alternate_optimize(&layout, &angles, &params, &cfg),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn fixed_layout_runs_covariance_only() {
        let params = SystemParams::reference(10.0);
        let angles = PathAngles::random(3, 3, &mut substream(8, 0));
        let layout = default_initial_layout(4, 4, &params, 2.25, 0.75).unwrap();
        let cfg = SolverConfig::for_wavelength(params.wavelength);
        let trace =
            alternate_optimize_sides(&layout, &angles, &params, &cfg, PositionUpdates::NONE)
                .unwrap();
        assert_eq!(trace.final_layout, layout);
        assert_eq!(trace.outer_iters_used, 1);
        assert_eq!(
            trace.objective_per_outer_iter[0],
            trace.objective_per_outer_iter[1]
        );
    }
}
