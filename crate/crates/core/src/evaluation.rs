//! Monte Carlo ergodic rate, baseline designs and gain figures.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::model::{
    field_matrices, upper_bound_from_fields, AntennaLayout, PathAngles, PathResponseMatrix,
    SystemParams, TransmitCovariance, FEASIBILITY_TOL,
};
use crate::optimizer::{
    alternate_optimize_sides, centred_line, default_initial_layout, PositionUpdates, SolveTrace,
    SolverConfig,
};
use crate::rng::{substream, CHANNEL_STREAM};

pub const DEFAULT_NUM_SAMPLES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErgodicRateEstimate {
    pub mean_rate: f64,
    pub std_error: f64,
    pub num_samples: usize,
    pub seed: u64,
}

/// Antenna designs compared in the experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaselineKind {
    /// Both sides movable.
    Fa,
    /// Fixed transmit ULA, movable receive antennas.
    Rfa,
    /// Fixed ULAs on both sides; only the covariance is optimized.
    Fpa,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 3] = [BaselineKind::Fa, BaselineKind::Rfa, BaselineKind::Fpa];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Fa => "FA",
            BaselineKind::Rfa => "RFA",
            BaselineKind::Fpa => "FPA",
        }
    }

    pub fn position_updates(self) -> PositionUpdates {
        match self {
            BaselineKind::Fa => PositionUpdates::ALL,
            BaselineKind::Rfa => PositionUpdates::RECEIVE_ONLY,
            BaselineKind::Fpa => PositionUpdates::NONE,
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "FA" => Ok(BaselineKind::Fa),
            "RFA" => Ok(BaselineKind::Rfa),
            "FPA" => Ok(BaselineKind::Fpa),
            other => Err(Error::Config(format!(
                "unknown design `{other}` (expected FA, RFA or FPA)"
            ))),
        }
    }
}

/// Draws `Sigma` with i.i.d. `CN(0, alpha^2)` entries.
pub fn sample_path_matrix<R: Rng + ?Sized>(
    params: &SystemParams,
    rng: &mut R,
) -> PathResponseMatrix {
    let normal = Normal::new(0.0, (params.path_gain_variance / 2.0).sqrt()).expect("finite std");
    let m = CMatrix::from_fn(params.num_rx_paths, params.num_tx_paths, |_, _| {
        Complex64::new(normal.sample(rng), normal.sample(rng))
    });
    PathResponseMatrix(m)
}

/// Monte Carlo estimate of `E log2 det(I_M + H Q H^H / sigma^2)` over `Sigma`,
/// with `Sigma` drawn from the channel substream of `seed`.
pub fn ergodic_rate_mc(
    layout: &AntennaLayout,
    angles: &PathAngles,
    q: &TransmitCovariance,
    params: &SystemParams,
    num_samples: usize,
    seed: u64,
) -> Result<ErgodicRateEstimate> {
    if num_samples == 0 {
        return Err(Error::param("num_samples", "must be >= 1"));
    }
    let (g, f) = field_matrices(layout, angles, params);
    if q.dim() != g.ncols() {
        return Err(Error::DimensionMismatch {
            context: "ergodic rate",
            expected: format!("Q {0}x{0}", g.ncols()),
            found: format!("Q {0}x{0}", q.dim()),
        });
    }
    // H Q H^H = F^H Sigma W Sigma^H F with W = G Q G^H.
    let mut w = &g * q.matrix() * g.adjoint();
    linalg::hermitize(&mut w);
    let f_scaled = &f * Complex64::from(params.noise_power.sqrt().recip());
    let f_scaled_h = f_scaled.adjoint();
    let m = f.ncols();

    let mut rng = substream(seed, CHANNEL_STREAM);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..num_samples {
        let sigma = sample_path_matrix(params, &mut rng);
        let s = sigma.matrix();
        let inner = s * &w * s.adjoint();
        let mut k = &f_scaled_h * inner * &f_scaled;
        for i in 0..m {
            k[(i, i)] += 1.0;
        }
        linalg::hermitize(&mut k);
        let r = linalg::hermitian_log2_det(&k)?;
        sum += r;
        sum_sq += r * r;
    }
    let n = num_samples as f64;
    let mean = sum / n;
    let std_error = if num_samples > 1 {
        let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(ErgodicRateEstimate {
        mean_rate: mean,
        std_error,
        num_samples,
        seed,
    })
}

/// Layout for a design: FPA and RFA use centred half-wavelength ULAs along x;
/// FA uses the optimizer's default initialization. The RFA receive side
/// starts from the same ULA.
pub fn build_baseline_layout(
    kind: BaselineKind,
    num_tx: usize,
    num_rx: usize,
    params: &SystemParams,
    region_half_width: f64,
    min_spacing: f64,
) -> Result<AntennaLayout> {
    if kind == BaselineKind::Fa {
        return default_initial_layout(num_tx, num_rx, params, region_half_width, min_spacing);
    }
    let spacing = params.wavelength / 2.0;
    if spacing < min_spacing - FEASIBILITY_TOL {
        return Err(Error::Config(format!(
            "half-wavelength ULA spacing {spacing} is below the minimum spacing {min_spacing}"
        )));
    }
    let longest = num_tx.max(num_rx);
    if num_tx == 0 || num_rx == 0 {
        return Err(Error::param("antenna count", "must be >= 1"));
    }
    let span = (longest - 1) as f64 * spacing;
    if span > 2.0 * region_half_width + FEASIBILITY_TOL {
        return Err(Error::Config(format!(
            "a {longest}-element half-wavelength ULA spans {span} m, larger than the region width {} m",
            2.0 * region_half_width
        )));
    }
    let layout = AntennaLayout {
        tx_positions: centred_line(num_tx, spacing),
        rx_positions: centred_line(num_rx, spacing),
        region_half_width,
        min_spacing,
    };
    layout.validate()?;
    Ok(layout)
}

/// `100 (rate_a - rate_b) / rate_b`.
pub fn relative_gain(rate_a: f64, rate_b: f64) -> Result<f64> {
    if !(rate_b > 0.0) || !rate_b.is_finite() || !rate_a.is_finite() {
        return Err(Error::param(
            "baseline rate",
            format!("must be finite and > 0, got {rate_b}"),
        ));
    }
    Ok(100.0 * (rate_a - rate_b) / rate_b)
}

/// Optimized design together with its bound and Monte Carlo rate.
#[derive(Clone, Debug)]
pub struct DesignEvaluation {
    pub kind: BaselineKind,
    pub trace: SolveTrace,
    pub upper_bound: f64,
    pub estimate: ErgodicRateEstimate,
}

/// Scenario pieces shared by all designs of one trial.
#[derive(Clone, Debug)]
pub struct DesignScenario<'a> {
    pub num_tx: usize,
    pub num_rx: usize,
    pub angles: &'a PathAngles,
    pub params: &'a SystemParams,
    pub region_half_width: f64,
    pub min_spacing: f64,
}

/// Optimizes `kind` from its baseline layout and evaluates the resulting
/// design with `num_samples` channel draws from `seed`.
pub fn evaluate_design(
    kind: BaselineKind,
    scenario: &DesignScenario<'_>,
    config: &SolverConfig,
    num_samples: usize,
    seed: u64,
) -> Result<DesignEvaluation> {
    let layout = build_baseline_layout(
        kind,
        scenario.num_tx,
        scenario.num_rx,
        scenario.params,
        scenario.region_half_width,
        scenario.min_spacing,
    )?;
    let trace = alternate_optimize_sides(
        &layout,
        scenario.angles,
        scenario.params,
        config,
        kind.position_updates(),
    )?;
    let (g, f) = field_matrices(&trace.final_layout, scenario.angles, scenario.params);
    let upper_bound = upper_bound_from_fields(&g, &f, &trace.final_q, scenario.params)?;
    let estimate = ergodic_rate_mc(
        &trace.final_layout,
        scenario.angles,
        &trace.final_q,
        scenario.params,
        num_samples,
        seed,
    )?;
    Ok(DesignEvaluation {
        kind,
        trace,
        upper_bound,
        estimate,
    })
}
