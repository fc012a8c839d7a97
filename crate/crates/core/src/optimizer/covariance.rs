use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::model::TransmitCovariance;

/// Closed-form maximizer of `tr(G Q G^H)` subject to `tr(Q) <= P_max`:
/// `Q = P_max G^H G / tr(G^H G)`.
///
/// Over the trace-constrained PSD cone, `tr(Q G^H G) <= sqrt(tr(Q^2) tr((G^H G)^2))`
/// with equality when `Q` is proportional to `G^H G`, and the budget is
/// always spent in full.
pub fn update_covariance(g: &CMatrix, power_budget: f64) -> Result<TransmitCovariance> {
    if !(power_budget.is_finite() && power_budget > 0.0) {
        return Err(Error::param("power_budget", "must be finite and > 0"));
    }
    let mut gram = g.adjoint() * g;
    linalg::hermitize(&mut gram);
    let tr = linalg::trace(&gram).re;
    // Unit-modulus field responses give tr = N * L_t; zero only for a caller-built G.
    if !(tr.is_finite() && tr > 0.0) {
        return Err(Error::param(
            "G",
            format!("tr(G^H G) must be positive, got {tr}"),
        ));
    }
    gram *= Complex64::from(power_budget / tr);
    Ok(TransmitCovariance::new_unchecked(gram))
}
