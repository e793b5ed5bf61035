//! Concrete split problems: a 2x2 linear ODE with a closed-form solution and
//! the radial equation recast as a harmonic oscillator with a time-dependent
//! spring constant.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// One side of the split generator, either fixed or sampled in time.
#[derive(Clone)]
pub enum OperatorSpec {
    Constant(Matrix),
    TimeVarying(Arc<dyn Fn(f64) -> Matrix + Send + Sync>),
}

impl OperatorSpec {
    pub fn at(&self, t: f64) -> Matrix {
        match self {
            OperatorSpec::Constant(m) => m.clone(),
            OperatorSpec::TimeVarying(f) => f(t),
        }
    }

    pub fn constant(&self) -> Option<&Matrix> {
        match self {
            OperatorSpec::Constant(m) => Some(m),
            OperatorSpec::TimeVarying(_) => None,
        }
    }
}

impl fmt::Debug for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorSpec::Constant(m) => f.debug_tuple("Constant").field(m).finish(),
            OperatorSpec::TimeVarying(_) => f.write_str("TimeVarying(..)"),
        }
    }
}

/// Where time-dependent operators are sampled within a splitting partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FreezePolicy {
    /// Sample at the partition midpoint (keeps the outer splitting at second
    /// order without a time-ordered expansion).
    #[default]
    Midpoint,
    /// Sample at the left endpoint t_n.
    Left,
}

impl FreezePolicy {
    pub fn sample_time(self, t_start: f64, t_end: f64) -> f64 {
        match self {
            FreezePolicy::Midpoint => 0.5 * (t_start + t_end),
            FreezePolicy::Left => t_start,
        }
    }
}

/// A split evolution problem u' = (A + B) u on [t0, T].
#[derive(Debug, Clone)]
pub struct SplitProblem {
    operator_a: OperatorSpec,
    operator_b: OperatorSpec,
    u0: Vector,
    t_start: f64,
    t_end: f64,
    freeze: FreezePolicy,
}

impl SplitProblem {
    pub fn new(
        operator_a: OperatorSpec,
        operator_b: OperatorSpec,
        u0: Vector,
        t_start: f64,
        t_end: f64,
        freeze: FreezePolicy,
    ) -> Result<Self> {
        if !(t_end > t_start) || !t_start.is_finite() || !t_end.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time interval [{t_start}, {t_end}] must be finite with T > t0"
            )));
        }
        let a0 = operator_a.at(t_start);
        let b0 = operator_b.at(t_start);
        if !a0.is_square() || !b0.is_square() || a0.rows() != b0.rows() || a0.rows() != u0.len() {
            return Err(Error::DimensionMismatch(
                "operators must be square, equal-sized, and conformable with u0".into(),
            ));
        }
        Ok(Self { operator_a, operator_b, u0, t_start, t_end, freeze })
    }

    pub fn operator_a(&self) -> &OperatorSpec {
        &self.operator_a
    }

    pub fn operator_b(&self) -> &OperatorSpec {
        &self.operator_b
    }

    pub fn initial_state(&self) -> &Vector {
        &self.u0
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn freeze(&self) -> FreezePolicy {
        self.freeze
    }

    pub fn is_constant(&self) -> bool {
        self.operator_a.constant().is_some() && self.operator_b.constant().is_some()
    }

    /// Operator pair for one partition, frozen per the policy. Constant
    /// operators ignore the policy.
    pub fn frozen_operators(&self, t_start: f64, t_end: f64) -> Result<(Matrix, Matrix)> {
        let t = self.freeze.sample_time(t_start, t_end);
        Ok((self.operator_a.at(t), self.operator_b.at(t)))
    }

    /// A(t) + B(t) for constant problems.
    pub fn full_generator(&self) -> Result<Matrix> {
        match (self.operator_a.constant(), self.operator_b.constant()) {
            (Some(a), Some(b)) => a.mat_add(b),
            _ => Err(Error::InvalidParameter(
                "full generator is only available for constant problems".into(),
            )),
        }
    }
}

/// The decaying 2x2 model problem: A carries the first rate down the first
/// column, B the second rate down the second, u0 = (1, 1) on [0, 1]. Both
/// columns of each operator sum to zero, so the component sum is conserved.
pub fn dahlquist_2x2(lambda1: f64, lambda2: f64) -> Result<SplitProblem> {
    if !(lambda1 > 0.0) || !(lambda2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rates must be positive, got ({lambda1}, {lambda2})"
        )));
    }
    let a = Matrix::from_rows(&[&[-lambda1, 0.0], &[lambda1, 0.0]])?;
    let b = Matrix::from_rows(&[&[0.0, lambda2], &[0.0, -lambda2]])?;
    SplitProblem::new(
        OperatorSpec::Constant(a),
        OperatorSpec::Constant(b),
        Vector::new(vec![1.0, 1.0])?,
        0.0,
        1.0,
        FreezePolicy::default(),
    )
}

/// Closed-form solution of the 2x2 model problem at time t.
pub fn exact_solution_2x2(lambda1: f64, lambda2: f64, t: f64) -> Result<Vector> {
    if lambda2 == 0.0 {
        return Err(Error::InvalidParameter("lambda2 must be nonzero".into()));
    }
    let ratio = lambda1 / lambda2;
    let c1 = 2.0 / (1.0 + ratio);
    let c2 = (1.0 - ratio) / (1.0 + ratio);
    let decay = (-(lambda1 + lambda2) * t).exp();
    Vector::new(vec![c1 - c2 * decay, ratio * c1 + c2 * decay])
}

/// Parameters of the radial problem viewed as a time-dependent oscillator.
#[derive(Clone)]
pub struct OscillatorSpec {
    pub energy: f64,
    pub angular: u32,
    pub potential: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub r_start: f64,
    pub r_end: f64,
}

impl fmt::Debug for OscillatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OscillatorSpec")
            .field("energy", &self.energy)
            .field("angular", &self.angular)
            .field("r_start", &self.r_start)
            .field("r_end", &self.r_end)
            .finish()
    }
}

impl OscillatorSpec {
    /// Free oscillator (V ≡ 0).
    pub fn free(energy: f64, angular: u32, r_start: f64, r_end: f64) -> Self {
        Self {
            energy,
            angular,
            potential: Arc::new(|_| 0.0),
            r_start,
            r_end,
        }
    }

    /// Spring constant k(t) = 2E − 2V(t) − l(l+1)/t².
    pub fn spring_constant(&self, t: f64) -> f64 {
        let centrifugal = if self.angular == 0 {
            0.0
        } else {
            (self.angular * (self.angular + 1)) as f64 / (t * t)
        };
        2.0 * self.energy - 2.0 * (self.potential)(t) - centrifugal
    }
}

/// Builds the split oscillator problem for state u = (q, p): the kinetic part
/// A = [[0,1],[0,0]] advances q' = p, the spring part B(t) = [[0,0],[-k,0]]
/// advances p' = -k q. The state starts at (1, 0).
pub fn radial_oscillator(spec: OscillatorSpec) -> Result<SplitProblem> {
    if spec.r_start <= 0.0 && spec.angular > 0 {
        return Err(Error::InvalidParameter(
            "centrifugal term is singular: r must stay positive when l > 0".into(),
        ));
    }
    if !(spec.r_end > spec.r_start) {
        return Err(Error::InvalidParameter("interval must satisfy R > r0".into()));
    }
    let a = Matrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]])?;
    let constant_k = spec.angular == 0;
    let b = if constant_k {
        // V may still vary, so only l = 0 with the default potential is truly
        // constant; sample once and keep it fixed when it is.
        let k0 = spec.spring_constant(spec.r_start);
        let k1 = spec.spring_constant(0.5 * (spec.r_start + spec.r_end));
        if (k0 - k1).abs() <= 1e-15 * k0.abs().max(1.0) {
            OperatorSpec::Constant(Matrix::from_rows(&[&[0.0, 0.0], &[-k0, 0.0]])?)
        } else {
            time_varying_spring(spec.clone())
        }
    } else {
        time_varying_spring(spec.clone())
    };
    SplitProblem::new(
        OperatorSpec::Constant(a),
        b,
        Vector::new(vec![1.0, 0.0])?,
        spec.r_start,
        spec.r_end,
        FreezePolicy::Midpoint,
    )
}

fn time_varying_spring(spec: OscillatorSpec) -> OperatorSpec {
    OperatorSpec::TimeVarying(Arc::new(move |t| {
        let k = spec.spring_constant(t);
        Matrix::from_rows(&[&[0.0, 0.0], &[-k, 0.0]]).expect("2x2 literals are finite")
    }))
}

/// Exact flow of the constant-k oscillator with k > 0, from (q0, p0) at t0.
pub fn oscillator_rotation(k: f64, q0: f64, p0: f64, t0: f64, t: f64) -> Result<Vector> {
    if !(k > 0.0) {
        return Err(Error::InvalidParameter("rotation flow needs k > 0".into()));
    }
    let omega = k.sqrt();
    let theta = omega * (t - t0);
    Vector::new(vec![
        q0 * theta.cos() + p0 / omega * theta.sin(),
        -q0 * omega * theta.sin() + p0 * theta.cos(),
    ])
}

/// Oscillator energy H = p²/2 + k q²/2.
pub fn oscillator_energy(k: f64, q: f64, p: f64) -> f64 {
    0.5 * p * p + 0.5 * k * q * q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_err;

    #[test]
    fn model_problem_operators_match_the_display() {
        let problem = dahlquist_2x2(0.25, 0.5).unwrap();
        let (a, b) = problem.frozen_operators(0.0, 1.0).unwrap();
        assert_eq!(a.entries(), &[-0.25, 0.0, 0.25, 0.0]);
        assert_eq!(b.entries(), &[0.0, 0.5, 0.0, -0.5]);
        // Zero column sums by construction.
        for j in 0..2 {
            assert_eq!(a.get(0, j) + a.get(1, j), 0.0);
            assert_eq!(b.get(0, j) + b.get(1, j), 0.0);
        }
        assert!(dahlquist_2x2(0.0, 0.5).is_err());
        assert!(dahlquist_2x2(0.25, -1.0).is_err());
    }

    #[test]
    fn steady_state_annihilates_the_full_generator() {
        let problem = dahlquist_2x2(0.25, 0.5).unwrap();
        let full = problem.full_generator().unwrap();
        let steady = Vector::new(vec![4.0 / 3.0, 2.0 / 3.0]).unwrap();
        let image = full.mat_apply(&steady).unwrap();
        assert!(image.max_abs() < 1e-15);
    }

    #[test]
    fn exact_solution_boundary_values() {
        let at0 = exact_solution_2x2(0.25, 0.5, 0.0).unwrap();
        assert!(max_abs_err(&at0, &Vector::new(vec![1.0, 1.0]).unwrap())
            .unwrap()
            .iter()
            .all(|&e| e < 1e-15));

        let at1 = exact_solution_2x2(0.25, 0.5, 1.0).unwrap();
        let decay = (-0.75f64).exp();
        assert!((at1.get(0) - (4.0 / 3.0 - decay / 3.0)).abs() < 1e-15);
        assert!((at1.get(1) - (2.0 / 3.0 + decay / 3.0)).abs() < 1e-15);

        // Late-time limit.
        let late = exact_solution_2x2(0.25, 0.5, 1e3).unwrap();
        assert!((late.get(0) - 4.0 / 3.0).abs() < 1e-14);
        assert!((late.get(1) - 2.0 / 3.0).abs() < 1e-14);
        assert!((late.component_sum() - 2.0).abs() < 1e-14);

        assert!(exact_solution_2x2(0.25, 0.0, 1.0).is_err());
    }

    #[test]
    fn exact_solution_agrees_with_the_exponential_flow() {
        // Independent route: expm of the full generator applied to u0.
        let problem = dahlquist_2x2(0.25, 0.5).unwrap();
        let full = problem.full_generator().unwrap();
        for t in [0.1, 0.5, 1.0] {
            let via_expm = full.expm(t).unwrap().mat_apply(problem.initial_state()).unwrap();
            let via_formula = exact_solution_2x2(0.25, 0.5, t).unwrap();
            let err = max_abs_err(&via_expm, &via_formula).unwrap();
            assert!(err.iter().all(|&e| e < 1e-13), "t={t}: {err:?}");
        }
    }

    #[test]
    fn exact_solution_satisfies_the_ode() {
        let problem = dahlquist_2x2(0.25, 0.5).unwrap();
        let full = problem.full_generator().unwrap();
        let h = 1e-6;
        for t in [0.0, 0.3, 0.9] {
            let ahead = exact_solution_2x2(0.25, 0.5, t + h).unwrap();
            let behind = exact_solution_2x2(0.25, 0.5, t).unwrap();
            let fd = ahead.sub(&behind).unwrap().scale(1.0 / h);
            let rhs = full.mat_apply(&behind).unwrap();
            let err = max_abs_err(&fd, &rhs).unwrap();
            assert!(err.iter().all(|&e| e < 1e-5), "t={t}: {err:?}");
        }
    }

    #[test]
    fn exact_solution_component_sum_is_two() {
        for t in [0.0, 0.25, 1.0, 3.0] {
            let u = exact_solution_2x2(0.25, 0.5, t).unwrap();
            assert!((u.component_sum() - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn spring_constant_values() {
        let spec = OscillatorSpec::free(0.5, 1, 1.0, 6.0);
        assert!((spec.spring_constant(2.0) - 0.5).abs() < 1e-15);
        let free = OscillatorSpec::free(0.5, 0, 1.0, 6.0);
        assert!((free.spring_constant(3.3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_angular_momentum_yields_a_constant_problem() {
        let problem = radial_oscillator(OscillatorSpec::free(0.5, 0, 1.0, 6.0)).unwrap();
        assert!(problem.is_constant());
        let (a, b) = problem.frozen_operators(1.0, 1.5).unwrap();
        assert_eq!(a.entries(), &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(b.entries(), &[0.0, 0.0, -1.0, 0.0]);
    }

    #[test]
    fn positive_angular_momentum_varies_in_time() {
        let problem = radial_oscillator(OscillatorSpec::free(0.5, 1, 1.0, 6.0)).unwrap();
        assert!(!problem.is_constant());
        // Midpoint freeze over [2, 2] pins the sample point at r = 2.
        let (_, b) = problem.frozen_operators(2.0, 2.0).unwrap();
        assert!((b.get(1, 0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn singular_centrifugal_start_is_rejected() {
        assert!(matches!(
            radial_oscillator(OscillatorSpec::free(0.5, 1, 0.0, 6.0)),
            Err(Error::InvalidParameter(_))
        ));
        // l = 0 tolerates r0 = 0.
        assert!(radial_oscillator(OscillatorSpec::free(0.5, 0, 0.0, 6.0)).is_ok());
    }

    #[test]
    fn rotation_flow_conserves_energy() {
        let k = 1.0;
        let h0 = oscillator_energy(k, 1.0, 0.0);
        for t in [1.5, 2.0, 4.7, 6.0] {
            let u = oscillator_rotation(k, 1.0, 0.0, 1.0, t).unwrap();
            let h = oscillator_energy(k, u.get(0), u.get(1));
            assert!((h - h0).abs() < 1e-14, "t={t}");
        }
    }

    #[test]
    fn freeze_policies_sample_where_they_say() {
        assert_eq!(FreezePolicy::Midpoint.sample_time(2.0, 3.0), 2.5);
        assert_eq!(FreezePolicy::Left.sample_time(2.0, 3.0), 2.0);
    }
}
