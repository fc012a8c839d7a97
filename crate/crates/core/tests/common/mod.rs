#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use fluid_mimo::{AntennaLayout, PathAngles, Point, SystemParams};

pub type CMatrix = DMatrix<Complex64>;

pub fn complex_gaussian<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Random Hermitian PSD matrix `X X^H` with trace `target_trace`.
pub fn random_psd<R: Rng>(rng: &mut R, n: usize, rank: usize, target_trace: f64) -> CMatrix {
    let x = complex_gaussian(rng, n, rank);
    let mut a = &x * x.adjoint();
    let tr: f64 = (0..n).map(|i| a[(i, i)].re).sum();
    a *= Complex64::from(target_trace / tr);
    hermitize(&mut a);
    a
}

pub fn hermitize(a: &mut CMatrix) {
    let h = (a.clone() + a.adjoint()) * Complex64::from(0.5);
    *a = h;
}

pub fn random_angles<R: Rng>(rng: &mut R, lt: usize, lr: usize) -> PathAngles {
    let mut draw = |n: usize| {
        (0..n)
            .map(|_| rng.random_range(0.0..std::f64::consts::PI))
            .collect::<Vec<_>>()
    };
    let (te, ta, re, ra) = (draw(lt), draw(lt), draw(lr), draw(lr));
    PathAngles::new(te, ta, re, ra).unwrap()
}

/// `n` points in `[-h, h]^2` with pairwise distance `>= d`, by rejection.
pub fn random_points<R: Rng>(rng: &mut R, n: usize, h: f64, d: f64) -> Vec<Point> {
    'outer: loop {
        let mut pts: Vec<Point> = Vec::with_capacity(n);
        for _ in 0..n {
            let mut placed = false;
            for _ in 0..1000 {
                let p = Point::new(rng.random_range(-h..=h), rng.random_range(-h..=h));
                if pts.iter().all(|q| q.distance(&p) >= d) {
                    pts.push(p);
                    placed = true;
                    break;
                }
            }
            if !placed {
                continue 'outer;
            }
        }
        return pts;
    }
}

pub fn random_layout<R: Rng>(rng: &mut R, n: usize, m: usize, h: f64, d: f64) -> AntennaLayout {
    AntennaLayout {
        tx_positions: random_points(rng, n, h, d),
        rx_positions: random_points(rng, m, h, d),
        region_half_width: h,
        min_spacing: d,
    }
}

/// Field response computed from the angles directly, one entry at a time.
pub fn steering(p: Point, elevation: &[f64], azimuth: &[f64], wavelength: f64) -> Vec<Complex64> {
    elevation
        .iter()
        .zip(azimuth)
        .map(|(&th, &ph)| {
            let rho = p.x * th.sin() * ph.cos() + p.y * th.cos();
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / wavelength * rho)
        })
        .collect()
}

pub fn tx_fields(layout: &AntennaLayout, angles: &PathAngles, params: &SystemParams) -> CMatrix {
    let cols: Vec<Vec<Complex64>> = layout
        .tx_positions
        .iter()
        .map(|&p| {
            steering(
                p,
                &angles.tx_elevation,
                &angles.tx_azimuth,
                params.wavelength,
            )
        })
        .collect();
    CMatrix::from_fn(params.num_tx_paths, cols.len(), |r, c| cols[c][r])
}

pub fn rx_fields(layout: &AntennaLayout, angles: &PathAngles, params: &SystemParams) -> CMatrix {
    let cols: Vec<Vec<Complex64>> = layout
        .rx_positions
        .iter()
        .map(|&p| {
            steering(
                p,
                &angles.rx_elevation,
                &angles.rx_azimuth,
                params.wavelength,
            )
        })
        .collect();
    CMatrix::from_fn(params.num_rx_paths, cols.len(), |r, c| cols[c][r])
}

pub fn trace(a: &CMatrix) -> Complex64 {
    (0..a.nrows()).map(|i| a[(i, i)]).sum()
}

/// Eigenvalues of a Hermitian matrix from its real symmetric embedding
/// `[[Re A, -Im A], [Im A, Re A]]`; each eigenvalue of `A` appears twice.
pub fn embedded_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let n = a.nrows();
    let real = DMatrix::<f64>::from_fn(2 * n, 2 * n, |r, c| {
        let z = a[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    real.symmetric_eigenvalues().iter().copied().collect()
}

/// `log2 det(I + A)` for Hermitian PSD `A`.
pub fn log2_det_i_plus(a: &CMatrix) -> f64 {
    embedded_eigenvalues(a)
        .iter()
        .map(|&l| (1.0 + l).log2())
        .sum::<f64>()
        / 2.0
}

/// Jensen bound evaluated with independent field matrices and eigenvalues.
pub fn bound_oracle(
    layout: &AntennaLayout,
    angles: &PathAngles,
    q: &CMatrix,
    params: &SystemParams,
) -> f64 {
    let g = tx_fields(layout, angles, params);
    let f = rx_fields(layout, angles, params);
    let a = params.path_gain_variance / params.noise_power * trace(&(&g * q * g.adjoint())).re;
    log2_det_i_plus(&(f.adjoint() * &f * Complex64::from(a)))
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral norm of a real symmetric 2x2 matrix.
pub fn sym2_norm(a: f64, b: f64, d: f64) -> f64 {
    let mean = (a + d) / 2.0;
    let r = (((a - d) / 2.0).powi(2) + b * b).sqrt();
    (mean + r).abs().max((mean - r).abs())
}
