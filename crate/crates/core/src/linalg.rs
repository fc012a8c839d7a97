//! Small dense complex linear algebra helpers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Largest absolute entry of `m - m^H`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

/// Replaces `m` with `(m + m^H) / 2`.
pub fn hermitize(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Lower-triangular `L` with `m = L L^H` and a real positive diagonal.
///
/// Only the lower triangle of `m` is read. Fails on a non-positive pivot.
pub fn hermitian_cholesky(m: &CMatrix) -> Result<CMatrix> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "Cholesky",
            expected: "square matrix".into(),
            found: format!("{}x{}", n, m.ncols()),
        });
    }
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut pivot = m[(j, j)].re;
        for k in 0..j {
            pivot -= l[(j, k)].norm_sqr();
        }
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite("Cholesky pivot"));
        }
        let d = pivot.sqrt();
        l[(j, j)] = Complex64::from(d);
        for i in (j + 1)..n {
            let mut acc = m[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = acc / d;
        }
    }
    Ok(l)
}

/// `log2 det(m)` for a Hermitian positive definite `m`:
/// `det(m) = prod(L_ii)^2`.
pub fn hermitian_log2_det(m: &CMatrix) -> Result<f64> {
    if !is_finite(m) {
        return Err(Error::NonFinite("log-det argument"));
    }
    let l = hermitian_cholesky(m)?;
    Ok(2.0 * (0..m.nrows()).map(|i| l[(i, i)].re.log2()).sum::<f64>())
}

/// Inverse of a Hermitian positive definite matrix via `L^{-H} L^{-1}`.
pub fn hermitian_inverse(m: &CMatrix) -> Result<CMatrix> {
    if !is_finite(m) {
        return Err(Error::NonFinite("inverse argument"));
    }
    let l = hermitian_cholesky(m)?;
    let n = m.nrows();
    let l_inv = l
        .solve_lower_triangular(&CMatrix::identity(n, n))
        .ok_or(Error::NotPositiveDefinite("inverse"))?;
    let mut inv = l_inv.adjoint() * l_inv;
    hermitize(&mut inv);
    Ok(inv)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut h = m.clone();
    hermitize(&mut h);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `x^H A y`.
pub fn quadratic_form(x: &CVector, a: &CMatrix, y: &CVector) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        let mut row = Complex64::new(0.0, 0.0);
        for j in 0..a.ncols() {
            row += a[(i, j)] * y[j];
        }
        acc += x[i].conj() * row;
    }
    acc
}
