//! Closed-form second and third iterates via the Laplace-transform route.
//!
//! The resolvent algebra that produces these forms needs the difference of
//! the operators to be invertible; both entry points attempt that inverse
//! first and report `SingularMatrix` when it does not exist, instead of
//! returning garbage.
//!
//! For the second iterate the partial-fraction step generalizes to
//! non-commuting operators through a Sylvester equation: with M solving
//! `B M − M A = A`,
//!
//! ```text
//! c_2(t) = exp(Bt) (I + M) c  −  M exp(At) c ,
//! ```
//!
//! which reduces to the familiar `A(B−A)^{-1}` coefficients when A and B
//! commute. The third iterate is evaluated exactly as the last block of the
//! exponential of the three-iterate chain generator, the closed form that
//! stays finite for non-commuting pairs.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::splitting::{chain_generator, check_operator_pair};

/// Solves the Sylvester equation B·M − M·A = RHS via the Kronecker system.
fn solve_sylvester(b: &Matrix, a: &Matrix, rhs: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    // Column-stacked unknowns: (I ⊗ B − Aᵀ ⊗ I) vec(M) = vec(RHS).
    let mut k = Matrix::zeros(n * n, n * n);
    for col_block in 0..n {
        for i in 0..n {
            for j in 0..n {
                k.set(col_block * n + i, col_block * n + j, b.get(i, j));
            }
        }
    }
    for cb in 0..n {
        for rb in 0..n {
            let coeff = -a.get(rb, cb); // (Aᵀ)_{cb, rb}
            if coeff != 0.0 {
                for i in 0..n {
                    let old = k.get(cb * n + i, rb * n + i);
                    k.set(cb * n + i, rb * n + i, old + coeff);
                }
            }
        }
    }
    let inv = k.inverse()?;
    let mut stacked = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            stacked[j * n + i] = rhs.get(i, j);
        }
    }
    let solution = inv.mat_apply(&Vector::new(stacked)?)?;
    let mut m = Matrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            m.set(i, j, solution.get(j * n + i));
        }
    }
    Ok(m)
}

fn check_inputs(a: &Matrix, b: &Matrix, c_n: &Vector) -> Result<usize> {
    let n = check_operator_pair(a, b)?;
    if c_n.len() != n {
        return Err(Error::DimensionMismatch(
            "state dimension does not match the operators".into(),
        ));
    }
    Ok(n)
}

/// Closed-form second iterate. Fails with `SingularMatrix` when B − A is
/// singular (or the associated Sylvester operator is).
pub fn laplace_c2(a: &Matrix, b: &Matrix, c_n: &Vector, t: f64) -> Result<Vector> {
    check_inputs(a, b, c_n)?;
    if !t.is_finite() {
        return Err(Error::NonFinite("laplace_c2 time argument"));
    }
    let _ = b.mat_sub(a)?.inverse()?;
    let m = solve_sylvester(b, a, a)?;

    let exp_at = a.expm(t)?;
    let exp_bt = b.expm(t)?;
    let lifted = c_n.add(&m.mat_apply(c_n)?)?;
    let principal = exp_bt.mat_apply(&lifted)?;
    let correction = m.mat_apply(&exp_at.mat_apply(c_n)?)?;
    principal.sub(&correction)
}

/// Closed-form third iterate, evaluated as the last block of the exponential
/// of the three-iterate chain generator. Keeps the documented requirement
/// that B − A (equivalently A − B) is invertible and fails with
/// `SingularMatrix` otherwise.
pub fn laplace_c3(a: &Matrix, b: &Matrix, c_n: &Vector, t: f64) -> Result<Vector> {
    let n = check_inputs(a, b, c_n)?;
    if !t.is_finite() {
        return Err(Error::NonFinite("laplace_c3 time argument"));
    }
    let _ = b.mat_sub(a)?.inverse()?;
    let _ = a.mat_sub(b)?.inverse()?;

    let generator = chain_generator(&[a, b, a])?;
    let propagator = generator.expm(t)?;
    let mut stacked = Vec::with_capacity(3 * n);
    for _ in 0..3 {
        stacked.extend_from_slice(c_n.entries());
    }
    let evolved = propagator.mat_apply(&Vector::new(stacked)?)?;
    Vector::new(evolved.entries()[2 * n..].to_vec())
}
