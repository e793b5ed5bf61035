//! Seeded property suites behind the CLI `check` subcommand. Each suite
//! reports the worst residual it saw against its tolerance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{max_abs_err, Matrix, Vector};
use crate::problems::dahlquist_2x2;
use crate::splitting::{
    block_semigroup_propagator, chain_generator, laplace_c2, laplace_c3, phi_k, sweep,
    IterateGrid, QuadRule, SweepSide,
};

const SEED: u64 = 0x5eed_cafe;

/// Outcome of one property suite.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub max_residual: f64,
    pub tolerance: f64,
    pub cases: usize,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.max_residual <= self.tolerance
    }
}

/// Random matrix with entries uniform in [-scale, scale].
pub fn random_matrix(rng: &mut impl Rng, n: usize, scale: f64) -> Matrix {
    let data: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-scale..=scale)).collect();
    Matrix::new(n, n, data).expect("bounded entries are finite")
}

/// Random vector with entries uniform in [-scale, scale].
pub fn random_vector(rng: &mut impl Rng, n: usize, scale: f64) -> Vector {
    let data: Vec<f64> = (0..n).map(|_| rng.gen_range(-scale..=scale)).collect();
    Vector::new(data).expect("bounded entries are finite")
}

/// Recurrence residual ‖φ_k − ((1/k!) I + τM φ_{k+1})‖ for k = 0..=4 over
/// twenty random matrices.
pub fn check_phi() -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for case in 0..20 {
        let n = 2 + case % 3;
        let m = random_matrix(&mut rng, n, 1.0);
        for tau in [0.1, 1.0] {
            let mut factorial = 1.0;
            let mut phis: Vec<Matrix> = Vec::with_capacity(6);
            for k in 0..=5 {
                phis.push(phi_k(&m, tau, k)?);
            }
            for k in 0..=4usize {
                if k > 0 {
                    factorial *= k as f64;
                }
                let rhs = Matrix::identity(n)
                    .mat_scale(1.0 / factorial)
                    .mat_add(&m.mat_scale(tau).mat_mul(&phis[k + 1])?)?;
                let residual = phis[k].mat_sub(&rhs)?.max_abs();
                worst = worst.max(residual);
                cases += 1;
            }
        }
    }
    Ok(CheckReport { name: "phi recurrence", max_residual: worst, tolerance: 1e-9, cases })
}

/// Block propagator against the exponential of the assembled block generator,
/// plus the equal-operator secular coupling block.
pub fn check_semigroup() -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 1);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for _ in 0..20 {
        let a = random_matrix(&mut rng, 2, 1.0);
        let b = random_matrix(&mut rng, 2, 1.0);
        let generator = chain_generator(&[&a, &b])?;
        for t in [0.1, 0.5, 1.0] {
            let assembled = block_semigroup_propagator(&a, &b, t)?;
            let exponential = generator.expm(t)?;
            worst = worst.max(assembled.mat_sub(&exponential)?.max_abs());
            cases += 1;
        }
    }
    // Equal operators: the coupling block must be t·A·exp(At).
    let a = random_matrix(&mut rng, 2, 1.0);
    for t in [0.5, 1.0] {
        let assembled = block_semigroup_propagator(&a, &a, t)?;
        let secular = a.mat_mul(&a.expm(t)?)?.mat_scale(t);
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((assembled.get(2 + i, j) - secular.get(i, j)).abs());
            }
        }
        cases += 1;
    }
    Ok(CheckReport { name: "block semigroup", max_residual: worst, tolerance: 1e-8, cases })
}

/// Closed-form second and third iterates against fine-grid sweeps on random
/// pairs, and the expected failure on the singular model pair.
pub fn check_laplace() -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 2);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    let mut produced = 0;
    while produced < 8 {
        let a = random_matrix(&mut rng, 2, 1.0);
        let b = random_matrix(&mut rng, 2, 1.0);
        if b.mat_sub(&a)?.inverse().is_err() {
            continue;
        }
        produced += 1;
        let c = random_vector(&mut rng, 2, 1.0);
        let t = 1.0;
        let closed2 = match laplace_c2(&a, &b, &c, t) {
            Ok(v) => v,
            Err(Error::SingularMatrix { .. }) => continue,
            Err(e) => return Err(e),
        };
        let swept2 = fine_sweeps(&a, &b, &c, t, 2)?;
        for e in max_abs_err(&closed2, &swept2)? {
            worst = worst.max(e);
        }
        let closed3 = laplace_c3(&a, &b, &c, t)?;
        let swept3 = fine_sweeps(&a, &b, &c, t, 3)?;
        for e in max_abs_err(&closed3, &swept3)? {
            worst = worst.max(e);
        }
        cases += 2;
    }

    // The model pair has det(B - A) = 0 and must fail loudly.
    let problem = dahlquist_2x2(0.25, 0.5)?;
    let (a, b) = problem.frozen_operators(0.0, 1.0)?;
    let c = Vector::new(vec![1.0, 1.0])?;
    match laplace_c2(&a, &b, &c, 1.0) {
        Err(Error::SingularMatrix { .. }) => cases += 1,
        Err(e) => return Err(e),
        Ok(_) => {
            return Err(Error::InvalidParameter(
                "singular pair unexpectedly produced a closed-form iterate".into(),
            ))
        }
    }
    Ok(CheckReport { name: "laplace closed forms", max_residual: worst, tolerance: 1e-6, cases })
}

fn fine_sweeps(a: &Matrix, b: &Matrix, c: &Vector, t: f64, count: usize) -> Result<Vector> {
    let mut grid = IterateGrid::zero(0.0, t, 1000, c.len())?;
    for i in 1..=count {
        grid = sweep(a, b, &grid, c, SweepSide::for_iteration(i), QuadRule::Bode)?;
    }
    Ok(grid.final_value().clone())
}

/// Runs all suites.
pub fn check_all() -> Result<Vec<CheckReport>> {
    Ok(vec![check_phi()?, check_semigroup()?, check_laplace()?])
}
