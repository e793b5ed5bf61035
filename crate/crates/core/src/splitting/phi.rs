//! φ-functions of a scaled matrix argument.
//!
//! `phi_k(M, tau, k)` evaluates
//!
//! ```text
//! φ_k(τM) = ∫_0^1 exp((1 - s) τ M) s^{k-1} / (k-1)!  ds      (k ≥ 1)
//! φ_0(τM) = exp(τM)
//! ```
//!
//! by a high-resolution composite Boole quadrature, accurate enough that the
//! recurrence φ_k = (1/k!) I + τM φ_{k+1} holds to well below 1e-10 for the
//! moderate arguments this crate works with.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Panels of the composite Boole quadrature over [0, 1].
const PANELS: usize = 1600;

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

pub fn phi_k(m: &Matrix, tau: f64, k: usize) -> Result<Matrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "phi_k needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !tau.is_finite() {
        return Err(Error::NonFinite("phi_k scaling argument"));
    }
    if k == 0 {
        return m.expm(tau);
    }

    // Substituting σ = 1 - s turns the integrand into
    // exp(σ τ M) (1 - σ)^{k-1} / (k-1)!, so the exponential factor is the
    // running power of one short-step propagator.
    let n = m.rows();
    let step = m.expm(tau / PANELS as f64)?;
    let inv_fact = 1.0 / factorial(k - 1);
    let mut power = Matrix::identity(n);
    let mut sum = Matrix::zeros(n, n);
    for j in 0..=PANELS {
        let sigma = j as f64 / PANELS as f64;
        let weight = boole_weight(j) * (1.0 - sigma).powi(k as i32 - 1) * inv_fact;
        if weight != 0.0 {
            sum = sum.mat_add(&power.mat_scale(weight))?;
        }
        if j < PANELS {
            power = power.mat_mul(&step)?;
        }
    }
    Ok(sum.mat_scale(1.0 / PANELS as f64))
}

/// Composite Boole node weight in units of the spacing.
fn boole_weight(j: usize) -> f64 {
    if j == 0 || j == PANELS {
        14.0 / 45.0
    } else if j.is_multiple_of(4) {
        28.0 / 45.0
    } else if j.is_multiple_of(2) {
        24.0 / 45.0
    } else {
        64.0 / 45.0
    }
}
