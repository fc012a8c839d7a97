//! Single-antenna position subproblems.
//!
//! With every other variable fixed, moving one antenna changes the bound
//! through a real quadratic form `p(x) = v(x)^H K v(x)`, where `v(x)` is the
//! antenna's field-response vector and `K` is Hermitian:
//!
//! - receive antenna `m`: `K = B_m = (I + a F_m F_m^H)^{-1}` with `F_m` the
//!   receive field matrix without column `m`; the bound equals
//!   `log2(1 + a p(r_m))` plus terms independent of `r_m`.
//! - transmit antenna `n`: `K = C_n = sum_{k != n} g_k g_k^H`; with `Q`
//!   re-optimized, `tr(G Q G^H) = P_max ||G G^H||_F^2 / (N L_t)` and
//!   `||G G^H||_F^2 = 2 p(t_n) + L_t^2 + (terms without t_n)`.
//!
//! `p` is maximized by minorization-maximization: at the current point a
//! concave quadratic with certified curvature lies below `p` everywhere, the
//! non-convex spacing constraints are replaced by inner half-planes, and the
//! resulting 2-D problem is solved exactly by projecting onto a polygon.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::model::{
    field_vector_from_cosines, PathAngles, Point, Side, SystemParams, FEASIBILITY_TOL,
};
use crate::optimizer::SolverConfig;

/// Smallest curvature used by the surrogate.
pub const MIN_CURVATURE: f64 = 1e-12;

/// `B_m = (I_{L_r} + a sum_{k != m} f_k f_k^H)^{-1}`.
pub fn receive_coefficient_matrix(f: &CMatrix, m: usize, a: f64) -> Result<CMatrix> {
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::param(
            "a",
            format!("must be finite and >= 0, got {a}"),
        ));
    }
    if m >= f.ncols() {
        return Err(Error::param(
            "m",
            format!("index {m} out of range for {} antennas", f.ncols()),
        ));
    }
    let lr = f.nrows();
    let mut k = CMatrix::identity(lr, lr);
    for (col, fk) in f.column_iter().enumerate() {
        if col != m {
            k += fk * fk.adjoint() * Complex64::from(a);
        }
    }
    linalg::hermitize(&mut k);
    linalg::hermitian_inverse(&k)
}

/// `C_n = sum_{k != n} g_k g_k^H`.
pub fn transmit_coefficient_matrix(g: &CMatrix, n: usize) -> Result<CMatrix> {
    if n >= g.ncols() {
        return Err(Error::param(
            "n",
            format!("index {n} out of range for {} antennas", g.ncols()),
        ));
    }
    let lt = g.nrows();
    let mut c = CMatrix::zeros(lt, lt);
    for (col, gk) in g.column_iter().enumerate() {
        if col != n {
            c += gk * gk.adjoint();
        }
    }
    linalg::hermitize(&mut c);
    Ok(c)
}

/// One antenna's position subproblem: maximize `v(x)^H K v(x)` over the
/// region box subject to spacing `>= min_spacing` from `fixed_positions`.
#[derive(Clone, Debug)]
pub struct PositionSubproblem {
    pub side: Side,
    pub coefficient_matrix: CMatrix,
    pub fixed_positions: Vec<Point>,
    pub current_position: Point,
    pub region_half_width: f64,
    pub min_spacing: f64,
}

impl PositionSubproblem {
    pub fn is_feasible(&self, p: Point) -> bool {
        let h = self.region_half_width + FEASIBILITY_TOL;
        p.x.abs() <= h
            && p.y.abs() <= h
            && self
                .fixed_positions
                .iter()
                .all(|k| p.distance(k) >= self.min_spacing - FEASIBILITY_TOL)
    }
}

/// The phase quadratic `p(x) = v(x)^H K v(x)` with `v_q(x) = exp(j k (u_q x + w_q y))`.
pub(crate) struct PhaseQuadratic<'a> {
    matrix: &'a CMatrix,
    cosines: Vec<(f64, f64)>,
    wave_number: f64,
}

impl<'a> PhaseQuadratic<'a> {
    pub(crate) fn new(
        matrix: &'a CMatrix,
        side: Side,
        angles: &PathAngles,
        params: &SystemParams,
    ) -> Self {
        let cosines = angles.direction_cosines(side);
        debug_assert_eq!(cosines.len(), matrix.nrows());
        PhaseQuadratic {
            matrix,
            cosines,
            wave_number: params.wave_number(),
        }
    }

    /// `z_q = conj(v_q) (K v)_q`; `p = sum Re z_q`.
    fn weighted_terms(&self, x: Point) -> Vec<Complex64> {
        let v = field_vector_from_cosines(x, &self.cosines, self.wave_number);
        let kv = self.matrix * &v;
        v.iter().zip(kv.iter()).map(|(a, b)| a.conj() * b).collect()
    }

    pub(crate) fn value(&self, x: Point) -> f64 {
        self.weighted_terms(x).iter().map(|z| z.re).sum()
    }

    /// `dp/dx_i = 2 Re{(dv/dx_i)^H K v} = 2 k sum_q c_{q,i} Im z_q`.
    pub(crate) fn value_and_gradient(&self, x: Point) -> (f64, [f64; 2]) {
        let z = self.weighted_terms(x);
        let mut value = 0.0;
        let mut grad = [0.0; 2];
        for (zq, &(u, w)) in z.iter().zip(&self.cosines) {
            value += zq.re;
            grad[0] += u * zq.im;
            grad[1] += w * zq.im;
        }
        let s = 2.0 * self.wave_number;
        (value, [s * grad[0], s * grad[1]])
    }
}

/// Value of the subproblem objective at `candidate`.
pub fn position_objective(
    sub: &PositionSubproblem,
    candidate: Point,
    angles: &PathAngles,
    params: &SystemParams,
) -> f64 {
    PhaseQuadratic::new(&sub.coefficient_matrix, sub.side, angles, params).value(candidate)
}

/// Analytic gradient of [`position_objective`] with respect to `(x, y)`.
pub fn position_gradient(
    sub: &PositionSubproblem,
    candidate: Point,
    angles: &PathAngles,
    params: &SystemParams,
) -> [f64; 2] {
    PhaseQuadratic::new(&sub.coefficient_matrix, sub.side, angles, params)
        .value_and_gradient(candidate)
        .1
}

/// Certified bound on the spectral norm of the 2x2 Hessian of the subproblem
/// objective over the whole plane.
///
/// `p(x) = sum_{q,q'} K_{qq'} exp(j k ((u_{q'} - u_q) x + (w_{q'} - w_q) y))`.
/// Every direction-cosine difference is at most 2 in magnitude, so each
/// second partial derivative of a term is bounded by `|K_{qq'}| (2 k)^2 =
/// |K_{qq'}| (4 pi / lambda)^2`. A symmetric 2x2 matrix whose entries are
/// bounded by `b` has spectral norm at most `2 b`.
pub fn curvature_bound(sub: &PositionSubproblem, params: &SystemParams, safety: f64) -> f64 {
    curvature_bound_for(&sub.coefficient_matrix, params, safety)
}

pub(crate) fn curvature_bound_for(k: &CMatrix, params: &SystemParams, safety: f64) -> f64 {
    let abs_sum: f64 = k.iter().map(|z| z.norm()).sum();
    let freq = 2.0 * params.wave_number();
    (safety * 2.0 * freq * freq * abs_sum).max(MIN_CURVATURE)
}

/// Half-plane `normal . x <= offset` with a unit normal.
#[derive(Clone, Copy, Debug)]
struct HalfPlane {
    normal: [f64; 2],
    offset: f64,
}

impl HalfPlane {
    fn slack(&self, x: Point) -> f64 {
        self.offset - (self.normal[0] * x.x + self.normal[1] * x.y)
    }
}

fn box_constraints(half_width: f64) -> [HalfPlane; 4] {
    [
        HalfPlane {
            normal: [1.0, 0.0],
            offset: half_width,
        },
        HalfPlane {
            normal: [-1.0, 0.0],
            offset: half_width,
        },
        HalfPlane {
            normal: [0.0, 1.0],
            offset: half_width,
        },
        HalfPlane {
            normal: [0.0, -1.0],
            offset: half_width,
        },
    ]
}

/// Inner approximation of `||x - other|| >= d` linearized at `at`:
/// `n . (x - other) >= d` with `n = (at - other) / ||at - other||`. By
/// Cauchy-Schwarz the left side never exceeds `||x - other||`.
fn linearized_spacing(at: Point, other: Point, d: f64) -> HalfPlane {
    let dist = at.distance(&other);
    assert!(dist > 0.0, "spacing linearization at a coincident point");
    let n = [(at.x - other.x) / dist, (at.y - other.y) / dist];
    HalfPlane {
        normal: [-n[0], -n[1]],
        offset: -d - n[0] * other.x - n[1] * other.y,
    }
}

/// Euclidean projection of `target` onto the polygon `{x : all constraints}`
/// by enumerating the interior, every edge foot and every vertex. Among
/// equally close candidates the one nearest `anchor` wins. `None` when the
/// polygon is empty.
fn project_onto_polygon(target: Point, constraints: &[HalfPlane], anchor: Point) -> Option<Point> {
    let scale = 1.0 + target.norm().max(anchor.norm());
    let tol = 1e-12 * scale;
    let feasible = |x: Point| constraints.iter().all(|c| c.slack(x) >= -tol);
    if feasible(target) {
        return Some(target);
    }
    let mut best: Option<(f64, f64, Point)> = None;
    let mut consider = |x: Point| {
        if !feasible(x) {
            return;
        }
        let d = x.distance(&target);
        let tie = x.distance(&anchor);
        match best {
            Some((bd, bt, _)) if d > bd + tol || (d >= bd - tol && tie >= bt) => {}
            _ => best = Some((d, tie, x)),
        }
    };
    for c in constraints {
        let excess = -c.slack(target);
        consider(Point::new(
            target.x - excess * c.normal[0],
            target.y - excess * c.normal[1],
        ));
    }
    for (i, a) in constraints.iter().enumerate() {
        for b in &constraints[i + 1..] {
            let det = a.normal[0] * b.normal[1] - a.normal[1] * b.normal[0];
            if det.abs() < 1e-14 {
                continue;
            }
            let x = (a.offset * b.normal[1] - a.normal[1] * b.offset) / det;
            let y = (a.normal[0] * b.offset - a.offset * b.normal[0]) / det;
            consider(Point::new(x, y));
        }
    }
    best.map(|(_, _, x)| x)
}

/// `new` beats `old` by more than round-off.
fn is_improvement(new: f64, old: f64) -> bool {
    new - old > 1e-13 * old.abs().max(1.0)
}

fn clamp_to_box(x: Point, h: f64) -> Point {
    Point::new(x.x.clamp(-h, h), x.y.clamp(-h, h))
}

/// Feasible local maxima of a uniform `n x n` grid over the region (each
/// at least as good as its feasible 8-neighbours), best first, at most `keep`.
fn grid_peaks(
    sub: &PositionSubproblem,
    form: &PhaseQuadratic<'_>,
    n: usize,
    keep: usize,
) -> Vec<(Point, f64)> {
    if n < 2 || keep == 0 {
        return Vec::new();
    }
    let h = sub.region_half_width;
    let step = 2.0 * h / (n - 1) as f64;
    let at = |i: usize, j: usize| Point::new(-h + step * i as f64, -h + step * j as f64);
    let values: Vec<Option<f64>> = (0..n * n)
        .map(|idx| {
            let x = at(idx / n, idx % n);
            sub.is_feasible(x).then(|| form.value(x))
        })
        .collect();
    let mut peaks = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let Some(v) = values[i * n + j] else { continue };
            let mut is_peak = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || ni < 0 || nj < 0 || ni >= n as i64 || nj >= n as i64 {
                        continue;
                    }
                    if values[ni as usize * n + nj as usize].is_some_and(|w| w > v) {
                        is_peak = false;
                    }
                }
            }
            if is_peak {
                peaks.push((at(i, j), v));
            }
        }
    }
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    peaks.truncate(keep);
    peaks
}

/// Minorization-maximization ascent from a feasible `start`.
///
/// Each iteration first tries a curvature below the certified `delta`
/// (halved after every accepted step, doubled on rejection) and falls back
/// to `delta` itself, where the surrogate provably lies below `p`. Only
/// points that raise `p` are accepted.
fn ascend(
    sub: &PositionSubproblem,
    form: &PhaseQuadratic<'_>,
    start: Point,
    delta: f64,
    config: &SolverConfig,
) -> (Point, f64) {
    let h = sub.region_half_width;
    let spacing_active = sub.min_spacing > 0.0;
    let mut x = start;
    let (mut value, mut grad) = form.value_and_gradient(x);
    let mut trial = delta;
    let mut constraints: Vec<HalfPlane> = Vec::with_capacity(4 + sub.fixed_positions.len());
    for _ in 0..config.max_inner_iters {
        constraints.clear();
        constraints.extend(box_constraints(h));
        if spacing_active {
            constraints.extend(
                sub.fixed_positions
                    .iter()
                    .map(|&k| linearized_spacing(x, k, sub.min_spacing)),
            );
        }
        let mut accepted = None;
        loop {
            let curvature = trial.min(delta);
            let target = Point::new(x.x + grad[0] / curvature, x.y + grad[1] / curvature);
            let candidate = project_onto_polygon(target, &constraints, x)
                .map(|p| clamp_to_box(p, h))
                .filter(|&p| sub.is_feasible(p));
            if let Some(next) = candidate {
                let (next_value, next_grad) = form.value_and_gradient(next);
                if is_improvement(next_value, value) {
                    accepted = Some((next, next_value, next_grad));
                    break;
                }
            }
            if curvature >= delta {
                break;
            }
            trial = curvature * 2.0;
        }
        let Some((next, next_value, next_grad)) = accepted else {
            break;
        };
        let moved = next.distance(&x);
        x = next;
        value = next_value;
        grad = next_grad;
        trial = (trial / 2.0).max(MIN_CURVATURE);
        if moved < config.inner_tolerance {
            break;
        }
    }
    (x, value)
}

/// Improves one antenna's position by minorization-maximization.
///
/// Each inner iteration maximizes the concave surrogate
/// `p(x0) + grad p(x0) . (x - x0) - (c / 2) ||x - x0||^2` over the box
/// intersected with the linearized spacing half-planes, which is the
/// projection of `x0 + grad / c` onto that polygon; `c` never exceeds the
/// certified curvature bound and steps that do not raise `p` are rejected.
/// When `config.candidate_grid > 1` the ascent is also started from the best
/// local maxima of a coarse feasible grid and the best end point wins.
///
/// The returned point is feasible and its objective is at least the entry
/// objective.
pub fn solve_position_step(
    sub: &PositionSubproblem,
    angles: &PathAngles,
    params: &SystemParams,
    config: &SolverConfig,
) -> Result<Point> {
    if !sub.is_feasible(sub.current_position) {
        return Err(Error::InfeasibleLayout(format!(
            "{:?} subproblem entry position ({}, {}) violates the region or spacing constraints",
            sub.side, sub.current_position.x, sub.current_position.y
        )));
    }
    let form = PhaseQuadratic::new(&sub.coefficient_matrix, sub.side, angles, params);
    let delta = curvature_bound(sub, params, config.hessian_bound_safety);

    let mut best = ascend(sub, &form, sub.current_position, delta, config);
    for (start, _) in grid_peaks(sub, &form, config.candidate_grid, SolverConfig::GRID_STARTS) {
        let end = ascend(sub, &form, start, delta, config);
        if is_improvement(end.1, best.1) {
            best = end;
        }
    }
    Ok(best.0)
}
