//! Plain-text experiment configuration.
//!
//! One `key = value` pair per line; `#` starts a comment; lists are
//! comma-separated. Every key is optional and unknown keys are rejected.
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `experiment` | `convergence`, `snr` or `region` | unset (chosen by the CLI) |
//! | `N`, `M` | transmit / receive antennas | 4, 4 |
//! | `L_t`, `L_r` | transmit / receive paths | 3, 3 |
//! | `wavelength` | meters | 1.5 |
//! | `A` | region side in wavelengths | 3 |
//! | `D` | minimum spacing in wavelengths | 0.5 |
//! | `noise_dbm` | noise power | 15 |
//! | `alpha2` | path-gain variance | 1 / L_r |
//! | `snr_db` | SNR grid of the SNR sweep | 0, 2.5, ..., 15 |
//! | `pmax_dbm` | power grid of the convergence run | 20, 25, 30 |
//! | `a_over_lambda` | region grid of the region sweep | 1.5, 1.75, ..., 3.5 |
//! | `region_snr_db` | SNR used by the region sweep | 10 |
//! | `designs` | subset of `FA, RFA, FPA` | all three |
//! | `trials` | angle realizations per point | 100 |
//! | `seed` | base seed | 1 |
//! | `mc_samples` | channel draws per rate estimate | 10000 |
//! | `epsilon`, `max_outer_iters`, `max_inner_iters` | outer/inner loop limits | 1e-3, 100, 200 |
//! | `inner_tolerance` | inner-step threshold in wavelengths | 1e-6 |
//! | `hessian_bound_safety` | curvature multiplier | 1 |
//! | `candidate_grid` | coarse start-grid points per axis (0 disables) | 41 |
//! | `tx_elevation`, `tx_azimuth`, `rx_elevation`, `rx_azimuth` | fixed angles (radians) instead of random draws | random |
//! | `output` | CSV path | unset |

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::evaluation::{BaselineKind, DEFAULT_NUM_SAMPLES};
use crate::model::{PathAngles, SystemParams};
use crate::optimizer::SolverConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Convergence,
    SnrSweep,
    RegionSweep,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::SnrSweep => "snr",
            ExperimentKind::RegionSweep => "region",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "convergence" => Ok(ExperimentKind::Convergence),
            "snr" | "snr_sweep" => Ok(ExperimentKind::SnrSweep),
            "region" | "region_sweep" => Ok(ExperimentKind::RegionSweep),
            other => Err(Error::Config(format!("unknown experiment `{other}`"))),
        }
    }
}

/// Scenario constants shared by every run of an experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub num_tx: usize,
    pub num_rx: usize,
    pub num_tx_paths: usize,
    pub num_rx_paths: usize,
    pub wavelength: f64,
    pub noise_dbm: f64,
    pub path_gain_variance: f64,
    /// Region side `A / lambda`.
    pub region_wavelengths: f64,
    /// Minimum spacing `D / lambda`.
    pub spacing_wavelengths: f64,
    /// Fixed angles; drawn per trial when `None`.
    pub angles: Option<PathAngles>,
}

impl Scenario {
    pub fn params_at_snr(&self, snr_db: f64) -> Result<SystemParams> {
        SystemParams::from_snr_db(
            self.wavelength,
            self.noise_dbm,
            snr_db,
            self.num_tx_paths,
            self.num_rx_paths,
            self.path_gain_variance,
        )
    }

    pub fn half_width(&self, region_wavelengths: f64) -> f64 {
        region_wavelengths * self.wavelength / 2.0
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing_wavelengths * self.wavelength
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub experiment: Option<ExperimentKind>,
    pub scenario: Scenario,
    pub snr_grid_db: Vec<f64>,
    pub pmax_grid_dbm: Vec<f64>,
    pub region_grid: Vec<f64>,
    pub region_snr_db: f64,
    pub designs: Vec<BaselineKind>,
    pub num_angle_trials: usize,
    pub base_seed: u64,
    pub mc_samples: usize,
    pub solver: SolverConfig,
    pub output: Option<PathBuf>,
}

fn grid(start: f64, step: f64, stop: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        let wavelength = 1.5;
        ExperimentSpec {
            experiment: None,
            scenario: Scenario {
                num_tx: 4,
                num_rx: 4,
                num_tx_paths: 3,
                num_rx_paths: 3,
                wavelength,
                noise_dbm: 15.0,
                path_gain_variance: 1.0 / 3.0,
                region_wavelengths: 3.0,
                spacing_wavelengths: 0.5,
                angles: None,
            },
            snr_grid_db: grid(0.0, 2.5, 15.0),
            pmax_grid_dbm: vec![20.0, 25.0, 30.0],
            region_grid: grid(1.5, 0.25, 3.5),
            region_snr_db: 10.0,
            designs: BaselineKind::ALL.to_vec(),
            num_angle_trials: 100,
            base_seed: 1,
            mc_samples: DEFAULT_NUM_SAMPLES,
            solver: SolverConfig::for_wavelength(wavelength),
            output: None,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let s = &self.scenario;
        let bad = |key: &str, why: &str| Err(Error::Config(format!("key `{key}`: {why}")));
        if s.num_tx == 0 {
            return bad("N", "must be >= 1");
        }
        if s.num_rx == 0 {
            return bad("M", "must be >= 1");
        }
        if s.num_tx_paths == 0 {
            return bad("L_t", "must be >= 1");
        }
        if s.num_rx_paths == 0 {
            return bad("L_r", "must be >= 1");
        }
        if !(s.wavelength.is_finite() && s.wavelength > 0.0) {
            return bad("wavelength", "must be > 0");
        }
        if !s.noise_dbm.is_finite() {
            return bad("noise_dbm", "must be finite");
        }
        if !(s.path_gain_variance.is_finite() && s.path_gain_variance > 0.0) {
            return bad("alpha2", "must be > 0");
        }
        if !(s.region_wavelengths.is_finite() && s.region_wavelengths > 0.0) {
            return bad("A", "must be > 0");
        }
        if !(s.spacing_wavelengths.is_finite() && s.spacing_wavelengths >= 0.0) {
            return bad("D", "must be >= 0");
        }
        if let Some(angles) = &s.angles {
            angles
                .validate()
                .map_err(|e| Error::Config(format!("key `tx_elevation`/`rx_elevation`: {e}")))?;
            if angles.num_tx_paths() != s.num_tx_paths || angles.num_rx_paths() != s.num_rx_paths {
                return bad(
                    "tx_elevation",
                    "angle lists must have L_t (transmit) and L_r (receive) entries",
                );
            }
        }
        for (key, g) in [
            ("snr_db", &self.snr_grid_db),
            ("pmax_dbm", &self.pmax_grid_dbm),
            ("a_over_lambda", &self.region_grid),
        ] {
            if g.is_empty() {
                return bad(key, "grid must not be empty");
            }
            if g.iter().any(|v| !v.is_finite()) {
                return bad(key, "grid values must be finite");
            }
        }
        if self.region_grid.iter().any(|&a| a <= 0.0) {
            return bad("a_over_lambda", "region sizes must be > 0");
        }
        if !self.region_snr_db.is_finite() {
            return bad("region_snr_db", "must be finite");
        }
        if self.designs.is_empty() {
            return bad("designs", "must name at least one design");
        }
        if self.num_angle_trials == 0 {
            return bad("trials", "must be >= 1");
        }
        if self.mc_samples == 0 {
            return bad("mc_samples", "must be >= 1");
        }
        self.solver
            .validate()
            .map_err(|e| Error::Config(format!("solver settings: {e}")))?;
        Ok(())
    }
}

/// Reads and validates a config file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_str(&text)
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| Error::Config(format!("key `{key}`: cannot parse `{}`", raw.trim())))
}

fn list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>> {
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| value(key, s))
        .collect()
}

/// Parses config text; missing keys keep their defaults.
pub fn parse_config_str(text: &str) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::default();
    let mut seen = HashSet::new();
    let mut alpha2 = None;
    let mut inner_tol_wavelengths = 1e-6;
    let mut angle_lists: [Option<Vec<f64>>; 4] = Default::default();

    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, raw) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim();
        if !seen.insert(key.to_string()) {
            return Err(Error::Config(format!("key `{key}`: given more than once")));
        }
        let s = &mut spec.scenario;
        match key {
            "experiment" => spec.experiment = Some(raw.trim().parse()?),
            "N" => s.num_tx = value(key, raw)?,
            "M" => s.num_rx = value(key, raw)?,
            "L_t" => s.num_tx_paths = value(key, raw)?,
            "L_r" => s.num_rx_paths = value(key, raw)?,
            "wavelength" => s.wavelength = value(key, raw)?,
            "A" => s.region_wavelengths = value(key, raw)?,
            "D" => s.spacing_wavelengths = value(key, raw)?,
            "noise_dbm" => s.noise_dbm = value(key, raw)?,
            "alpha2" => alpha2 = Some(value(key, raw)?),
            "snr_db" => spec.snr_grid_db = list(key, raw)?,
            "pmax_dbm" => spec.pmax_grid_dbm = list(key, raw)?,
            "a_over_lambda" => spec.region_grid = list(key, raw)?,
            "region_snr_db" => spec.region_snr_db = value(key, raw)?,
            "designs" => spec.designs = list(key, raw)?,
            "trials" => spec.num_angle_trials = value(key, raw)?,
            "seed" => spec.base_seed = value(key, raw)?,
            "mc_samples" => spec.mc_samples = value(key, raw)?,
            "epsilon" => spec.solver.epsilon = value(key, raw)?,
            "max_outer_iters" => spec.solver.max_outer_iters = value(key, raw)?,
            "max_inner_iters" => spec.solver.max_inner_iters = value(key, raw)?,
            "inner_tolerance" => inner_tol_wavelengths = value(key, raw)?,
            "hessian_bound_safety" => spec.solver.hessian_bound_safety = value(key, raw)?,
            "candidate_grid" => spec.solver.candidate_grid = value(key, raw)?,
            "tx_elevation" => angle_lists[0] = Some(list(key, raw)?),
            "tx_azimuth" => angle_lists[1] = Some(list(key, raw)?),
            "rx_elevation" => angle_lists[2] = Some(list(key, raw)?),
            "rx_azimuth" => angle_lists[3] = Some(list(key, raw)?),
            "output" => spec.output = Some(PathBuf::from(raw.trim())),
            other => return Err(Error::Config(format!("key `{other}`: unknown key"))),
        }
    }

    let s = &mut spec.scenario;
    s.path_gain_variance = alpha2.unwrap_or(1.0 / s.num_rx_paths.max(1) as f64);
    spec.solver.inner_tolerance = inner_tol_wavelengths * s.wavelength;
    let given = angle_lists.iter().filter(|l| l.is_some()).count();
    if given == 4 {
        let [te, ta, re, ra] = angle_lists.map(Option::unwrap);
        s.angles = Some(PathAngles {
            tx_elevation: te,
            tx_azimuth: ta,
            rx_elevation: re,
            rx_azimuth: ra,
        });
    } else if given != 0 {
        return Err(Error::Config(
            "key `tx_elevation`: explicit angles need all of tx_elevation, tx_azimuth, rx_elevation, rx_azimuth".into(),
        ));
    }
    let mut dedup = HashSet::new();
    if !spec.designs.iter().all(|d| dedup.insert(*d)) {
        return Err(Error::Config("key `designs`: duplicate design".into()));
    }
    spec.validate()?;
    Ok(spec)
}
