//! Scenario data model, far-field geometry and the deterministic rate bound.
//!
//! Each antenna sits at a 2-D point inside an `A x A` square centred on the
//! origin. A path with elevation `theta` and azimuth `phi` sees the antenna
//! at `(x, y)` with a propagation-distance offset
//! `x sin(theta) cos(phi) + y cos(theta)` relative to the origin, which turns
//! into a phase `2 pi / lambda` times that offset. Stacking the per-path
//! phasors gives the field-response vector of one antenna, and stacking those
//! column-wise gives the field-response matrices `G` (transmit, `L_t x N`)
//! and `F` (receive, `L_r x M`). The channel is `H = F^H Sigma G`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

/// Feasibility slack used for box and spacing checks (meters).
pub const FEASIBILITY_TOL: f64 = 1e-9;

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemParams {
    /// Carrier wavelength in meters.
    pub wavelength: f64,
    /// Noise power in milliwatts.
    pub noise_power: f64,
    /// Transmit power budget in milliwatts.
    pub power_budget: f64,
    pub num_tx_paths: usize,
    pub num_rx_paths: usize,
    /// Per-entry variance of the path response matrix.
    pub path_gain_variance: f64,
}

impl SystemParams {
    pub fn new(
        wavelength: f64,
        noise_power: f64,
        power_budget: f64,
        num_tx_paths: usize,
        num_rx_paths: usize,
        path_gain_variance: f64,
    ) -> Result<Self> {
        let p = SystemParams {
            wavelength,
            noise_power,
            power_budget,
            num_tx_paths,
            num_rx_paths,
            path_gain_variance,
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds parameters from dBm noise power and an SNR `P_max / sigma^2` in dB.
    pub fn from_snr_db(
        wavelength: f64,
        noise_dbm: f64,
        snr_db: f64,
        num_tx_paths: usize,
        num_rx_paths: usize,
        path_gain_variance: f64,
    ) -> Result<Self> {
        Self::new(
            wavelength,
            dbm_to_mw(noise_dbm),
            dbm_to_mw(noise_dbm + snr_db),
            num_tx_paths,
            num_rx_paths,
            path_gain_variance,
        )
    }

    /// Reference scenario: lambda = 1.5 m, sigma^2 = 15 dBm, L_t = L_r = 3,
    /// alpha^2 = 1 / L_r.
    pub fn reference(snr_db: f64) -> Self {
        Self::from_snr_db(1.5, 15.0, snr_db, 3, 3, 1.0 / 3.0)
            .expect("reference parameters are valid")
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(
                    name,
                    format!("must be finite and > 0, got {v}"),
                ))
            }
        };
        positive("wavelength", self.wavelength)?;
        positive("noise_power", self.noise_power)?;
        positive("power_budget", self.power_budget)?;
        positive("path_gain_variance", self.path_gain_variance)?;
        if self.num_tx_paths == 0 {
            return Err(Error::param("num_tx_paths", "must be >= 1"));
        }
        if self.num_rx_paths == 0 {
            return Err(Error::param("num_rx_paths", "must be >= 1"));
        }
        Ok(())
    }

    pub fn snr(&self) -> f64 {
        self.power_budget / self.noise_power
    }

    /// Wave number `2 pi / lambda`.
    pub fn wave_number(&self) -> f64 {
        2.0 * PI / self.wavelength
    }
}

/// Angles of departure (transmit) and arrival (receive), radians in `[0, pi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathAngles {
    pub tx_elevation: Vec<f64>,
    pub tx_azimuth: Vec<f64>,
    pub rx_elevation: Vec<f64>,
    pub rx_azimuth: Vec<f64>,
}

impl PathAngles {
    pub fn new(
        tx_elevation: Vec<f64>,
        tx_azimuth: Vec<f64>,
        rx_elevation: Vec<f64>,
        rx_azimuth: Vec<f64>,
    ) -> Result<Self> {
        let a = PathAngles {
            tx_elevation,
            tx_azimuth,
            rx_elevation,
            rx_azimuth,
        };
        a.validate()?;
        Ok(a)
    }

    /// Draws every angle independently and uniformly from `[0, pi]`.
    pub fn random<R: Rng + ?Sized>(num_tx_paths: usize, num_rx_paths: usize, rng: &mut R) -> Self {
        let mut draw = |n: usize| (0..n).map(|_| rng.random::<f64>() * PI).collect::<Vec<_>>();
        let tx_elevation = draw(num_tx_paths);
        let tx_azimuth = draw(num_tx_paths);
        let rx_elevation = draw(num_rx_paths);
        let rx_azimuth = draw(num_rx_paths);
        PathAngles {
            tx_elevation,
            tx_azimuth,
            rx_elevation,
            rx_azimuth,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tx_elevation.len() != self.tx_azimuth.len() || self.tx_elevation.is_empty() {
            return Err(Error::param(
                "tx angles",
                "elevation and azimuth lists must be non-empty and equally long",
            ));
        }
        if self.rx_elevation.len() != self.rx_azimuth.len() || self.rx_elevation.is_empty() {
            return Err(Error::param(
                "rx angles",
                "elevation and azimuth lists must be non-empty and equally long",
            ));
        }
        let all = self
            .tx_elevation
            .iter()
            .chain(&self.tx_azimuth)
            .chain(&self.rx_elevation)
            .chain(&self.rx_azimuth);
        for &v in all {
            if !(0.0..=PI).contains(&v) {
                return Err(Error::param("angles", format!("{v} outside [0, pi]")));
            }
        }
        Ok(())
    }

    pub fn num_tx_paths(&self) -> usize {
        self.tx_elevation.len()
    }

    pub fn num_rx_paths(&self) -> usize {
        self.rx_elevation.len()
    }

    /// Direction cosines `(sin(theta) cos(phi), cos(theta))` for each path on `side`.
    pub fn direction_cosines(&self, side: Side) -> Vec<(f64, f64)> {
        let (el, az) = match side {
            Side::Transmit => (&self.tx_elevation, &self.tx_azimuth),
            Side::Receive => (&self.rx_elevation, &self.rx_azimuth),
        };
        el.iter()
            .zip(az)
            .map(|(&t, &p)| (t.sin() * p.cos(), t.cos()))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Transmit,
    Receive,
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Positions of the transmit and receive antennas. Both regions are the
/// square `[-A/2, A/2]^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct AntennaLayout {
    pub tx_positions: Vec<Point>,
    pub rx_positions: Vec<Point>,
    pub region_half_width: f64,
    pub min_spacing: f64,
}

impl AntennaLayout {
    pub fn num_tx(&self) -> usize {
        self.tx_positions.len()
    }

    pub fn num_rx(&self) -> usize {
        self.rx_positions.len()
    }

    pub fn positions(&self, side: Side) -> &[Point] {
        match side {
            Side::Transmit => &self.tx_positions,
            Side::Receive => &self.rx_positions,
        }
    }

    pub fn positions_mut(&mut self, side: Side) -> &mut Vec<Point> {
        match side {
            Side::Transmit => &mut self.tx_positions,
            Side::Receive => &mut self.rx_positions,
        }
    }

    pub fn in_region(&self, p: &Point) -> bool {
        let h = self.region_half_width + FEASIBILITY_TOL;
        p.x.abs() <= h && p.y.abs() <= h
    }

    /// Checks the box constraint and the pairwise spacing on both sides.
    pub fn validate(&self) -> Result<()> {
        if !(self.region_half_width.is_finite() && self.region_half_width >= 0.0) {
            return Err(Error::param("region_half_width", "must be finite and >= 0"));
        }
        if !(self.min_spacing.is_finite() && self.min_spacing >= 0.0) {
            return Err(Error::param("min_spacing", "must be finite and >= 0"));
        }
        if self.tx_positions.is_empty() || self.rx_positions.is_empty() {
            return Err(Error::InfeasibleLayout(
                "each side needs at least one antenna".into(),
            ));
        }
        for side in [Side::Transmit, Side::Receive] {
            let pts = self.positions(side);
            for (i, p) in pts.iter().enumerate() {
                if !(p.x.is_finite() && p.y.is_finite()) {
                    return Err(Error::NonFinite("antenna position"));
                }
                if !self.in_region(p) {
                    return Err(Error::InfeasibleLayout(format!(
                        "{side:?} antenna {i} at ({}, {}) outside the region",
                        p.x, p.y
                    )));
                }
                for (j, q) in pts.iter().enumerate().skip(i + 1) {
                    let d = p.distance(q);
                    if d < self.min_spacing - FEASIBILITY_TOL {
                        return Err(Error::InfeasibleLayout(format!(
                            "{side:?} antennas {i} and {j} are {d} apart, minimum is {}",
                            self.min_spacing
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Path response matrix `Sigma` (`L_r x L_t`) between the two region origins.
#[derive(Clone, Debug, PartialEq)]
pub struct PathResponseMatrix(pub CMatrix);

impl PathResponseMatrix {
    pub fn new(entries: CMatrix, num_rx_paths: usize, num_tx_paths: usize) -> Result<Self> {
        if entries.shape() != (num_rx_paths, num_tx_paths) {
            return Err(Error::DimensionMismatch {
                context: "path response matrix",
                expected: format!("{num_rx_paths}x{num_tx_paths}"),
                found: format!("{}x{}", entries.nrows(), entries.ncols()),
            });
        }
        Ok(PathResponseMatrix(entries))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }
}

/// Hermitian PSD transmit covariance with `tr(Q) <= P_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransmitCovariance(CMatrix);

impl TransmitCovariance {
    pub const HERMITIAN_TOL: f64 = 1e-10;
    pub const PSD_TOL: f64 = 1e-10;
    pub const BUDGET_SLACK: f64 = 1e-9;

    pub fn new(q: CMatrix, power_budget: f64) -> Result<Self> {
        if q.nrows() != q.ncols() || q.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                context: "transmit covariance",
                expected: "non-empty square".into(),
                found: format!("{}x{}", q.nrows(), q.ncols()),
            });
        }
        if !linalg::is_finite(&q) {
            return Err(Error::NonFinite("transmit covariance"));
        }
        let defect = linalg::hermitian_defect(&q);
        if defect > Self::HERMITIAN_TOL {
            return Err(Error::param(
                "transmit covariance",
                format!("not Hermitian (defect {defect:e})"),
            ));
        }
        let tr = linalg::trace(&q).re;
        let min_ev = linalg::hermitian_eigenvalues(&q)[0];
        if min_ev < -Self::PSD_TOL * tr.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::param(
                "transmit covariance",
                format!("not positive semidefinite (min eigenvalue {min_ev:e})"),
            ));
        }
        if tr > power_budget * (1.0 + Self::BUDGET_SLACK) {
            return Err(Error::param(
                "transmit covariance",
                format!("trace {tr} exceeds power budget {power_budget}"),
            ));
        }
        Ok(TransmitCovariance(q))
    }

    pub(crate) fn new_unchecked(q: CMatrix) -> Self {
        TransmitCovariance(q)
    }

    pub fn zeros(n: usize) -> Self {
        TransmitCovariance(CMatrix::zeros(n, n))
    }

    /// `(P_max / N) I_N`.
    pub fn isotropic(n: usize, power_budget: f64) -> Self {
        TransmitCovariance(CMatrix::identity(n, n) * Complex64::from(power_budget / n as f64))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.0).re
    }
}

/// Signed propagation-distance offset of `position` relative to the origin
/// along a path with the given elevation and azimuth.
pub fn propagation_delta(position: Point, elevation: f64, azimuth: f64) -> f64 {
    position.x * elevation.sin() * azimuth.cos() + position.y * elevation.cos()
}

/// Field-response vector from precomputed direction cosines.
pub(crate) fn field_vector_from_cosines(
    position: Point,
    cosines: &[(f64, f64)],
    wave_number: f64,
) -> CVector {
    CVector::from_iterator(
        cosines.len(),
        cosines.iter().map(|&(u, v)| {
            Complex64::from_polar(1.0, wave_number * (position.x * u + position.y * v))
        }),
    )
}

pub fn field_vector(
    position: Point,
    angles: &PathAngles,
    side: Side,
    params: &SystemParams,
) -> CVector {
    field_vector_from_cosines(
        position,
        &angles.direction_cosines(side),
        params.wave_number(),
    )
}

/// Transmit field-response vector `g(t)`, length `L_t`.
pub fn tx_field_vector(position: Point, angles: &PathAngles, params: &SystemParams) -> CVector {
    field_vector(position, angles, Side::Transmit, params)
}

/// Receive field-response vector `f(r)`, length `L_r`.
pub fn rx_field_vector(position: Point, angles: &PathAngles, params: &SystemParams) -> CVector {
    field_vector(position, angles, Side::Receive, params)
}

pub fn field_matrix(
    positions: &[Point],
    angles: &PathAngles,
    side: Side,
    params: &SystemParams,
) -> CMatrix {
    let cos = angles.direction_cosines(side);
    let k = params.wave_number();
    let mut out = CMatrix::zeros(cos.len(), positions.len());
    for (col, &p) in positions.iter().enumerate() {
        out.set_column(col, &field_vector_from_cosines(p, &cos, k));
    }
    out
}

/// Returns `(G, F)`: transmit (`L_t x N`) and receive (`L_r x M`) field-response matrices.
pub fn field_matrices(
    layout: &AntennaLayout,
    angles: &PathAngles,
    params: &SystemParams,
) -> (CMatrix, CMatrix) {
    (
        field_matrix(&layout.tx_positions, angles, Side::Transmit, params),
        field_matrix(&layout.rx_positions, angles, Side::Receive, params),
    )
}

/// `H = F^H Sigma G` (`M x N`).
pub fn assemble_channel(g: &CMatrix, f: &CMatrix, sigma: &PathResponseMatrix) -> Result<CMatrix> {
    let s = sigma.matrix();
    if s.nrows() != f.nrows() || s.ncols() != g.nrows() {
        return Err(Error::DimensionMismatch {
            context: "channel assembly",
            expected: format!("Sigma {}x{}", f.nrows(), g.nrows()),
            found: format!("Sigma {}x{}", s.nrows(), s.ncols()),
        });
    }
    Ok(f.adjoint() * s * g)
}

/// `tr(G Q G^H)`, the power collected by the transmit paths.
pub fn path_power(g: &CMatrix, q: &TransmitCovariance) -> f64 {
    linalg::trace(&(g * q.matrix() * g.adjoint())).re
}

/// `log2 det(I_M + a F^H F)`.
pub fn log2_det_gram(f: &CMatrix, a: f64) -> Result<f64> {
    let m = f.ncols();
    let mut k = f.adjoint() * f * Complex64::from(a);
    for i in 0..m {
        k[(i, i)] += 1.0;
    }
    linalg::hermitize(&mut k);
    linalg::hermitian_log2_det(&k)
}

/// Jensen upper bound on the ergodic rate from precomputed field matrices:
/// `log2 det(I_M + (alpha^2 / sigma^2) tr(G Q G^H) F^H F)`.
pub fn upper_bound_from_fields(
    g: &CMatrix,
    f: &CMatrix,
    q: &TransmitCovariance,
    params: &SystemParams,
) -> Result<f64> {
    if q.dim() != g.ncols() {
        return Err(Error::DimensionMismatch {
            context: "upper bound",
            expected: format!("Q {0}x{0}", g.ncols()),
            found: format!("Q {0}x{0}", q.dim()),
        });
    }
    let a = params.path_gain_variance / params.noise_power * path_power(g, q);
    if !a.is_finite() {
        return Err(Error::NonFinite("upper bound scale"));
    }
    // Q is PSD so a >= 0 up to rounding.
    Ok(log2_det_gram(f, a.max(0.0))?.max(0.0))
}

/// Deterministic upper bound `R_bar` on the ergodic rate, bits/s/Hz.
pub fn upper_bound_rate(
    layout: &AntennaLayout,
    angles: &PathAngles,
    q: &TransmitCovariance,
    params: &SystemParams,
) -> Result<f64> {
    for p in layout.tx_positions.iter().chain(&layout.rx_positions) {
        if !(p.x.is_finite() && p.y.is_finite()) {
            return Err(Error::NonFinite("antenna position"));
        }
    }
    if !linalg::is_finite(q.matrix()) {
        return Err(Error::NonFinite("transmit covariance"));
    }
    let (g, f) = field_matrices(layout, angles, params);
    upper_bound_from_fields(&g, &f, q, params)
}

/// Closed-form `E{Sigma P Sigma^H} = tr(P) alpha^2 I_{L_r}` for i.i.d.
/// `CN(0, alpha^2)` entries.
pub fn jensen_expectation_identity(p: &CMatrix, alpha2: f64, num_rx_paths: usize) -> CMatrix {
    let scale = linalg::trace(p).re * alpha2;
    DMatrix::identity(num_rx_paths, num_rx_paths) * Complex64::from(scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    fn unit_params(lt: usize, lr: usize) -> SystemParams {
        SystemParams::new(1.5, 1.0, 1.0, lt, lr, 1.0).unwrap()
    }

    fn single_path(theta: f64, phi: f64) -> PathAngles {
        PathAngles::new(vec![theta], vec![phi], vec![theta], vec![phi]).unwrap()
    }

    #[test]
    fn delta_at_origin_is_zero() {
        for &(t, p) in &[(0.0, 0.0), (1.0, 2.0), (PI, PI)] {
            assert_eq!(propagation_delta(Point::ORIGIN, t, p), 0.0);
        }
    }

    #[test]
    fn delta_broadside() {
        assert!((propagation_delta(Point::new(1.0, 0.0), PI / 2.0, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn delta_matches_scalar_evaluation() {
        // 0.3 sin(1) cos(2) - 0.4 cos(1), evaluated independently to 20 digits.
        let expected = -0.321_173_568_859_460_28;
        let got = propagation_delta(Point::new(0.3, -0.4), 1.0, 2.0);
        assert!((got - expected).abs() < 1e-15, "{got}");
    }

    #[test]
    fn field_vectors_at_origin_are_ones() {
        let params = unit_params(3, 2);
        let mut rng = substream(1, 0);
        let angles = PathAngles::random(3, 2, &mut rng);
        let g = tx_field_vector(Point::ORIGIN, &angles, &params);
        let f = rx_field_vector(Point::ORIGIN, &angles, &params);
        assert_eq!(g.len(), 3);
        assert_eq!(f.len(), 2);
        assert!(g.iter().chain(f.iter()).all(|z| (*z - 1.0).norm() < 1e-15));
    }

    #[test]
    fn half_wavelength_offset_flips_sign() {
        let params = unit_params(1, 1);
        let angles = single_path(PI / 2.0, 0.0);
        let g = tx_field_vector(Point::new(params.wavelength / 2.0, 0.0), &angles, &params);
        assert!((g[0] + 1.0).norm() < 1e-12);
    }

    #[test]
    fn quarter_wavelength_offset_is_j() {
        let params = unit_params(1, 1);
        let angles = single_path(PI / 2.0, 0.0);
        let f = rx_field_vector(Point::new(params.wavelength / 4.0, 0.0), &angles, &params);
        assert!((f[0] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn field_vector_matches_phase_oracle() {
        let params = unit_params(4, 3);
        let mut rng = substream(2, 0);
        for _ in 0..20 {
            let angles = PathAngles::random(4, 3, &mut rng);
            let p = Point::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let g = tx_field_vector(p, &angles, &params);
            for i in 0..4 {
                let phase = 2.0 * PI / params.wavelength
                    * propagation_delta(p, angles.tx_elevation[i], angles.tx_azimuth[i]);
                assert!((g[i] - Complex64::new(phase.cos(), phase.sin())).norm() < 1e-12);
                assert!((g[i].norm() - 1.0).abs() < 1e-12);
            }
            let f = rx_field_vector(p, &angles, &params);
            for i in 0..3 {
                let phase = 2.0 * PI / params.wavelength
                    * propagation_delta(p, angles.rx_elevation[i], angles.rx_azimuth[i]);
                assert!((f[i] - Complex64::new(phase.cos(), phase.sin())).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn field_matrix_columns_match_vectors() {
        let params = unit_params(3, 2);
        let mut rng = substream(3, 0);
        let angles = PathAngles::random(3, 2, &mut rng);
        let layout = AntennaLayout {
            tx_positions: vec![Point::new(0.1, 0.2), Point::new(-0.7, 0.4)],
            rx_positions: vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, -1.0),
                Point::new(-1.0, 1.0),
            ],
            region_half_width: 2.0,
            min_spacing: 0.75,
        };
        let (g, f) = field_matrices(&layout, &angles, &params);
        assert_eq!(g.shape(), (3, 2));
        assert_eq!(f.shape(), (2, 3));
        for (n, &p) in layout.tx_positions.iter().enumerate() {
            assert_eq!(
                g.column(n).into_owned(),
                tx_field_vector(p, &angles, &params)
            );
        }
        for (m, &p) in layout.rx_positions.iter().enumerate() {
            assert_eq!(
                f.column(m).into_owned(),
                rx_field_vector(p, &angles, &params)
            );
        }
    }

    #[test]
    fn channel_dimension_mismatch_is_error() {
        let g = CMatrix::zeros(3, 2);
        let f = CMatrix::zeros(2, 4);
        let sigma = PathResponseMatrix(CMatrix::zeros(3, 3));
        assert!(matches!(
            assemble_channel(&g, &f, &sigma),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn zero_covariance_gives_zero_bound() {
        let params = SystemParams::reference(15.0);
        let mut rng = substream(4, 0);
        let angles = PathAngles::random(3, 3, &mut rng);
        let layout = AntennaLayout {
            tx_positions: vec![Point::new(0.3, 0.1), Point::new(-0.6, 0.0)],
            rx_positions: vec![Point::new(0.0, 0.0), Point::new(0.9, 0.0)],
            region_half_width: 2.25,
            min_spacing: 0.75,
        };
        let r = upper_bound_rate(&layout, &angles, &TransmitCovariance::zeros(2), &params).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn upper_bound_rejects_non_finite_positions() {
        let params = SystemParams::reference(15.0);
        let angles = single_path(1.0, 1.0);
        let layout = AntennaLayout {
            tx_positions: vec![Point::new(f64::NAN, 0.0)],
            rx_positions: vec![Point::ORIGIN],
            region_half_width: 1.0,
            min_spacing: 0.0,
        };
        let q = TransmitCovariance::isotropic(1, params.power_budget);
        assert!(upper_bound_rate(&layout, &angles, &q, &params).is_err());
    }

    #[test]
    fn covariance_validation() {
        let ok = TransmitCovariance::isotropic(3, 2.0);
        assert!(TransmitCovariance::new(ok.matrix().clone(), 2.0).is_ok());
        assert!(TransmitCovariance::new(ok.matrix().clone(), 1.0).is_err());
        let mut bad = CMatrix::identity(2, 2);
        bad[(1, 1)] = Complex64::from(-0.5);
        assert!(TransmitCovariance::new(bad, 10.0).is_err());
        let mut skew = CMatrix::identity(2, 2);
        skew[(0, 1)] = Complex64::new(0.0, 0.1);
        assert!(TransmitCovariance::new(skew, 10.0).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(SystemParams::new(0.0, 1.0, 1.0, 1, 1, 1.0).is_err());
        assert!(SystemParams::new(1.0, -1.0, 1.0, 1, 1, 1.0).is_err());
        assert!(SystemParams::new(1.0, 1.0, 1.0, 0, 1, 1.0).is_err());
        assert!(SystemParams::new(1.0, 1.0, 1.0, 1, 1, 0.0).is_err());
        let p = SystemParams::reference(15.0);
        assert!((p.snr() - db_to_linear(15.0)).abs() < 1e-9);
    }

    #[test]
    fn angles_outside_range_rejected() {
        assert!(PathAngles::new(vec![-0.1], vec![0.0], vec![0.0], vec![0.0]).is_err());
        assert!(PathAngles::new(vec![0.1], vec![4.0], vec![0.0], vec![0.0]).is_err());
        assert!(PathAngles::new(vec![0.1, 0.2], vec![0.0], vec![0.0], vec![0.0]).is_err());
    }

    #[test]
    fn layout_validation() {
        let mut layout = AntennaLayout {
            tx_positions: vec![Point::new(0.0, 0.0), Point::new(0.75, 0.0)],
            rx_positions: vec![Point::ORIGIN],
            region_half_width: 1.0,
            min_spacing: 0.75,
        };
        assert!(layout.validate().is_ok());
        layout.tx_positions[1].x = 0.7;
        assert!(matches!(layout.validate(), Err(Error::InfeasibleLayout(_))));
        layout.tx_positions[1] = Point::new(1.2, 0.0);
        assert!(matches!(layout.validate(), Err(Error::InfeasibleLayout(_))));
    }

    #[test]
    fn jensen_identity_trivial_cases() {
        let i = CMatrix::identity(3, 3);
        let e = jensen_expectation_identity(&i, 1.0, 2);
        assert_eq!(e, CMatrix::identity(2, 2) * Complex64::from(3.0));
        let z = jensen_expectation_identity(&CMatrix::zeros(3, 3), 1.0, 2);
        assert_eq!(z, CMatrix::zeros(2, 2));
    }
}
