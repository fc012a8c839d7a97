//! Python bindings for the `fluid_mimo` crate.
//!
//! Positions are `(x, y)` tuples in meters, matrices are lists of rows of
//! Python `complex`, rates are bits/s/Hz.

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use fluid_mimo::evaluation::{self, BaselineKind};
use fluid_mimo::linalg::CMatrix;
use fluid_mimo::model::{self, field_matrices};
use fluid_mimo::{optimizer, rng, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn points(pts: &[model::Point]) -> Vec<(f64, f64)> {
    pts.iter().map(|p| (p.x, p.y)).collect()
}

fn rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[pyclass(name = "SystemParams", module = "fluid_mimo", frozen)]
struct SystemParams {
    inner: model::SystemParams,
}

#[pymethods]
impl SystemParams {
    #[new]
    fn new(
        wavelength: f64,
        noise_power: f64,
        power_budget: f64,
        num_tx_paths: usize,
        num_rx_paths: usize,
        path_gain_variance: f64,
    ) -> PyResult<Self> {
        let inner = model::SystemParams::new(
            wavelength,
            noise_power,
            power_budget,
            num_tx_paths,
            num_rx_paths,
            path_gain_variance,
        )
        .map_err(to_py)?;
        Ok(SystemParams { inner })
    }

    /// Parameters from a dBm noise power and an SNR in dB.
    #[staticmethod]
    fn from_snr_db(
        wavelength: f64,
        noise_dbm: f64,
        snr_db: f64,
        num_tx_paths: usize,
        num_rx_paths: usize,
        path_gain_variance: f64,
    ) -> PyResult<Self> {
        let inner = model::SystemParams::from_snr_db(
            wavelength,
            noise_dbm,
            snr_db,
            num_tx_paths,
            num_rx_paths,
            path_gain_variance,
        )
        .map_err(to_py)?;
        Ok(SystemParams { inner })
    }

    /// lambda = 1.5 m, sigma^2 = 15 dBm, three paths per side, alpha^2 = 1/3.
    #[staticmethod]
    fn reference(snr_db: f64) -> Self {
        SystemParams {
            inner: model::SystemParams::reference(snr_db),
        }
    }

    #[getter]
    fn wavelength(&self) -> f64 {
        self.inner.wavelength
    }

    #[getter]
    fn noise_power(&self) -> f64 {
        self.inner.noise_power
    }

    #[getter]
    fn power_budget(&self) -> f64 {
        self.inner.power_budget
    }

    #[getter]
    fn num_tx_paths(&self) -> usize {
        self.inner.num_tx_paths
    }

    #[getter]
    fn num_rx_paths(&self) -> usize {
        self.inner.num_rx_paths
    }

    #[getter]
    fn path_gain_variance(&self) -> f64 {
        self.inner.path_gain_variance
    }

    fn snr(&self) -> f64 {
        self.inner.snr()
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "SystemParams(wavelength={}, noise_power={}, power_budget={}, num_tx_paths={}, num_rx_paths={}, path_gain_variance={})",
            p.wavelength, p.noise_power, p.power_budget, p.num_tx_paths, p.num_rx_paths, p.path_gain_variance
        )
    }
}

#[pyclass(name = "PathAngles", module = "fluid_mimo", frozen)]
struct PathAngles {
    inner: model::PathAngles,
}

#[pymethods]
impl PathAngles {
    #[new]
    fn new(
        tx_elevation: Vec<f64>,
        tx_azimuth: Vec<f64>,
        rx_elevation: Vec<f64>,
        rx_azimuth: Vec<f64>,
    ) -> PyResult<Self> {
        let inner = model::PathAngles::new(tx_elevation, tx_azimuth, rx_elevation, rx_azimuth)
            .map_err(to_py)?;
        Ok(PathAngles { inner })
    }

    /// Angles drawn uniformly on `[0, pi]` from the angle stream of `seed`.
    #[staticmethod]
    fn random(num_tx_paths: usize, num_rx_paths: usize, seed: u64) -> Self {
        let mut r = rng::substream(seed, rng::ANGLE_STREAM);
        PathAngles {
            inner: model::PathAngles::random(num_tx_paths, num_rx_paths, &mut r),
        }
    }

    #[getter]
    fn tx_elevation(&self) -> Vec<f64> {
        self.inner.tx_elevation.clone()
    }

    #[getter]
    fn tx_azimuth(&self) -> Vec<f64> {
        self.inner.tx_azimuth.clone()
    }

    #[getter]
    fn rx_elevation(&self) -> Vec<f64> {
        self.inner.rx_elevation.clone()
    }

    #[getter]
    fn rx_azimuth(&self) -> Vec<f64> {
        self.inner.rx_azimuth.clone()
    }
}

#[pyclass(name = "AntennaLayout", module = "fluid_mimo", frozen)]
struct AntennaLayout {
    inner: model::AntennaLayout,
}

#[pymethods]
impl AntennaLayout {
    /// Fails unless every antenna lies in the region and respects the spacing.
    #[new]
    fn new(
        tx: Vec<(f64, f64)>,
        rx: Vec<(f64, f64)>,
        region_half_width: f64,
        min_spacing: f64,
    ) -> PyResult<Self> {
        let to_points = |v: Vec<(f64, f64)>| {
            v.into_iter()
                .map(|(x, y)| model::Point::new(x, y))
                .collect()
        };
        let inner = model::AntennaLayout {
            tx_positions: to_points(tx),
            rx_positions: to_points(rx),
            region_half_width,
            min_spacing,
        };
        inner.validate().map_err(to_py)?;
        Ok(AntennaLayout { inner })
    }

    #[getter]
    fn tx_positions(&self) -> Vec<(f64, f64)> {
        points(&self.inner.tx_positions)
    }

    #[getter]
    fn rx_positions(&self) -> Vec<(f64, f64)> {
        points(&self.inner.rx_positions)
    }

    #[getter]
    fn region_half_width(&self) -> f64 {
        self.inner.region_half_width
    }

    #[getter]
    fn min_spacing(&self) -> f64 {
        self.inner.min_spacing
    }
}

#[pyclass(name = "TransmitCovariance", module = "fluid_mimo", frozen)]
struct TransmitCovariance {
    inner: model::TransmitCovariance,
}

#[pymethods]
impl TransmitCovariance {
    /// Checks Hermitian symmetry, positive semidefiniteness and the power budget.
    #[new]
    fn new(matrix: Vec<Vec<Complex64>>, power_budget: f64) -> PyResult<Self> {
        let n = matrix.len();
        if matrix.iter().any(|r| r.len() != n) {
            return Err(PyValueError::new_err(
                "covariance must be a square list of rows",
            ));
        }
        let m = CMatrix::from_fn(n, n, |i, j| matrix[i][j]);
        let inner = model::TransmitCovariance::new(m, power_budget).map_err(to_py)?;
        Ok(TransmitCovariance { inner })
    }

    #[staticmethod]
    fn isotropic(n: usize, power_budget: f64) -> Self {
        TransmitCovariance {
            inner: model::TransmitCovariance::isotropic(n, power_budget),
        }
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        rows(self.inner.matrix())
    }

    fn trace(&self) -> f64 {
        self.inner.trace()
    }
}

#[pyclass(name = "SolverConfig", module = "fluid_mimo", frozen)]
struct SolverConfig {
    inner: optimizer::SolverConfig,
}

#[pymethods]
impl SolverConfig {
    /// Defaults scaled to `wavelength`; keyword arguments override them.
    #[new]
    #[pyo3(signature = (wavelength, *, epsilon=None, max_outer_iters=None, max_inner_iters=None, candidate_grid=None))]
    fn new(
        wavelength: f64,
        epsilon: Option<f64>,
        max_outer_iters: Option<usize>,
        max_inner_iters: Option<usize>,
        candidate_grid: Option<usize>,
    ) -> PyResult<Self> {
        let mut inner = optimizer::SolverConfig::for_wavelength(wavelength);
        if let Some(v) = epsilon {
            inner.epsilon = v;
        }
        if let Some(v) = max_outer_iters {
            inner.max_outer_iters = v;
        }
        if let Some(v) = max_inner_iters {
            inner.max_inner_iters = v;
        }
        if let Some(v) = candidate_grid {
            inner.candidate_grid = v;
        }
        inner.validate().map_err(to_py)?;
        Ok(SolverConfig { inner })
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.epsilon
    }

    #[getter]
    fn max_outer_iters(&self) -> usize {
        self.inner.max_outer_iters
    }
}

#[pyclass(name = "SolveTrace", module = "fluid_mimo", frozen)]
struct SolveTrace {
    inner: optimizer::SolveTrace,
}

#[pymethods]
impl SolveTrace {
    #[getter]
    fn objective_per_outer_iter(&self) -> Vec<f64> {
        self.inner.objective_per_outer_iter.clone()
    }

    #[getter]
    fn final_layout(&self) -> AntennaLayout {
        AntennaLayout {
            inner: self.inner.final_layout.clone(),
        }
    }

    #[getter]
    fn final_q(&self) -> TransmitCovariance {
        TransmitCovariance {
            inner: self.inner.final_q.clone(),
        }
    }

    #[getter]
    fn outer_iters_used(&self) -> usize {
        self.inner.outer_iters_used
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    fn final_objective(&self) -> f64 {
        self.inner.final_objective()
    }
}

/// Jensen upper bound on the ergodic rate.
#[pyfunction]
fn upper_bound_rate(
    layout: &AntennaLayout,
    angles: &PathAngles,
    q: &TransmitCovariance,
    params: &SystemParams,
) -> PyResult<f64> {
    model::upper_bound_rate(&layout.inner, &angles.inner, &q.inner, &params.inner).map_err(to_py)
}

/// Closed-form covariance for the transmit positions of `layout`.
#[pyfunction]
fn update_covariance(
    layout: &AntennaLayout,
    angles: &PathAngles,
    params: &SystemParams,
) -> PyResult<TransmitCovariance> {
    let (g, _) = field_matrices(&layout.inner, &angles.inner, &params.inner);
    let inner = optimizer::update_covariance(&g, params.inner.power_budget).map_err(to_py)?;
    Ok(TransmitCovariance { inner })
}

/// Full alternating optimization from `layout`.
#[pyfunction]
#[pyo3(signature = (layout, angles, params, config=None))]
fn alternate_optimize(
    py: Python<'_>,
    layout: &AntennaLayout,
    angles: &PathAngles,
    params: &SystemParams,
    config: Option<&SolverConfig>,
) -> PyResult<SolveTrace> {
    let config = config
        .map(|c| c.inner.clone())
        .unwrap_or_else(|| optimizer::SolverConfig::for_wavelength(params.inner.wavelength));
    let inner = py
        .detach(|| {
            optimizer::alternate_optimize(&layout.inner, &angles.inner, &params.inner, &config)
        })
        .map_err(to_py)?;
    Ok(SolveTrace { inner })
}

/// Monte Carlo ergodic rate; returns `(mean_rate, std_error)`.
#[pyfunction]
#[pyo3(signature = (layout, angles, q, params, num_samples=evaluation::DEFAULT_NUM_SAMPLES, seed=0))]
fn ergodic_rate_mc(
    py: Python<'_>,
    layout: &AntennaLayout,
    angles: &PathAngles,
    q: &TransmitCovariance,
    params: &SystemParams,
    num_samples: usize,
    seed: u64,
) -> PyResult<(f64, f64)> {
    let est = py
        .detach(|| {
            evaluation::ergodic_rate_mc(
                &layout.inner,
                &angles.inner,
                &q.inner,
                &params.inner,
                num_samples,
                seed,
            )
        })
        .map_err(to_py)?;
    Ok((est.mean_rate, est.std_error))
}

/// Starting layout of a design: `"FA"`, `"RFA"` or `"FPA"`.
#[pyfunction]
fn build_baseline_layout(
    kind: &str,
    num_tx: usize,
    num_rx: usize,
    params: &SystemParams,
    region_half_width: f64,
    min_spacing: f64,
) -> PyResult<AntennaLayout> {
    let kind: BaselineKind = kind.parse().map_err(to_py)?;
    let inner = evaluation::build_baseline_layout(
        kind,
        num_tx,
        num_rx,
        &params.inner,
        region_half_width,
        min_spacing,
    )
    .map_err(to_py)?;
    Ok(AntennaLayout { inner })
}

/// `100 (rate_a - rate_b) / rate_b`.
#[pyfunction]
fn relative_gain(rate_a: f64, rate_b: f64) -> PyResult<f64> {
    evaluation::relative_gain(rate_a, rate_b).map_err(to_py)
}

#[pymodule(name = "fluid_mimo")]
fn fluid_mimo_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<SystemParams>()?;
    m.add_class::<PathAngles>()?;
    m.add_class::<AntennaLayout>()?;
    m.add_class::<TransmitCovariance>()?;
    m.add_class::<SolverConfig>()?;
    m.add_class::<SolveTrace>()?;
    m.add_function(wrap_pyfunction!(upper_bound_rate, m)?)?;
    m.add_function(wrap_pyfunction!(update_covariance, m)?)?;
    m.add_function(wrap_pyfunction!(alternate_optimize, m)?)?;
    m.add_function(wrap_pyfunction!(ergodic_rate_mc, m)?)?;
    m.add_function(wrap_pyfunction!(build_baseline_layout, m)?)?;
    m.add_function(wrap_pyfunction!(relative_gain, m)?)?;
    Ok(())
}
