//! The iterative operator-splitting scheme.
//!
//! On each splitting partition `[t_n, t_n + tau]` the iteration alternates
//! between an A-propagated and a B-propagated form. Each iterate solves
//!
//! ```text
//! c_i(t) = exp(P (t - t_n)) c_n  +  ∫_{t_n}^{t} exp(P (t - s)) Q c_{i-1}(s) ds
//! ```
//!
//! with `(P, Q) = (A, B)` for odd iterations and `(B, A)` for even ones,
//! starting from `c_0 ≡ 0`. Iterates live on a uniform intra-step node grid;
//! the integral is evaluated by composite Newton–Cotes rules over that grid,
//! with propagator factors `exp(P·k·h)` taken from a table built once per
//! operator and spacing.

mod block;
mod laplace;
mod phi;

pub use block::{block_semigroup_propagator, chain_generator};
pub use laplace::{laplace_c2, laplace_c3};
pub use phi::phi_k;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::problems::SplitProblem;

/// Composite quadrature rule used for the variation-of-constants integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadRule {
    /// Two-point rule, weights (1/2, 1/2).
    Trapezoid,
    /// Three-point rule, weights (1/6, 4/6, 1/6).
    Simpson,
    /// Five-point Boole rule, weights (7, 32, 12, 32, 7)/90.
    Bode,
}

impl QuadRule {
    /// Order label used in table captions and the order-law checks.
    pub fn nominal_order(self) -> u32 {
        match self {
            QuadRule::Trapezoid => 2,
            QuadRule::Simpson => 3,
            QuadRule::Bode => 4,
        }
    }

    /// Classical single-panel weights, normalized to unit panel length.
    pub fn base_weights(self) -> &'static [f64] {
        match self {
            QuadRule::Trapezoid => &[0.5, 0.5],
            QuadRule::Simpson => &[1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0],
            QuadRule::Bode => {
                &[7.0 / 90.0, 32.0 / 90.0, 12.0 / 90.0, 32.0 / 90.0, 7.0 / 90.0]
            }
        }
    }

    /// Node panels spanned by one application of the rule.
    pub fn min_panels(self) -> usize {
        match self {
            QuadRule::Trapezoid => 1,
            QuadRule::Simpson => 2,
            QuadRule::Bode => 4,
        }
    }

    /// Error level below which convergence-study cells are treated as
    /// saturated and excluded from order fits.
    pub fn default_floor(self) -> f64 {
        match self {
            QuadRule::Trapezoid | QuadRule::Simpson => 1e-8,
            QuadRule::Bode => 1e-12,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            QuadRule::Trapezoid => "trapezoid",
            QuadRule::Simpson => "simpson",
            QuadRule::Bode => "bode",
        }
    }

    /// Rejects node grids with fewer panels than one application of the rule.
    pub fn check_grid(self, panels: usize) -> Result<()> {
        if panels < self.min_panels() {
            return Err(Error::GridIncompatible(format!(
                "{} needs at least {} panels per step, grid has {}",
                self.name(),
                self.min_panels(),
                panels
            )));
        }
        Ok(())
    }

    /// Node/weight pairs (weights in units of the spacing h) for the integral
    /// over nodes `0..=m`. Junction nodes may appear in several pairs.
    ///
    /// Remainder panels that do not fill a whole application of the rule are
    /// covered by shorter closed rules. For Boole the fallbacks keep the
    /// per-panel error at O(h^5): Simpson for two panels, Simpson 3/8 for
    /// three, and a four-point cubic edge rule for the very first panel (it
    /// reads two nodes beyond the panel, which the kernel table supports).
    fn assembly(self, m: usize) -> Vec<(usize, f64)> {
        debug_assert!(m >= 1);
        let mut w = Vec::with_capacity(m + 2);
        match self {
            QuadRule::Trapezoid => trapezoid_span(&mut w, 0, m),
            QuadRule::Simpson => {
                if m == 1 {
                    trapezoid_span(&mut w, 0, 1);
                } else if m.is_multiple_of(2) {
                    simpson_span(&mut w, 0, m);
                } else {
                    simpson_span(&mut w, 0, m - 1);
                    trapezoid_span(&mut w, m - 1, m);
                }
            }
            QuadRule::Bode => match m {
                1 => edge_panel(&mut w),
                2 => simpson_span(&mut w, 0, 2),
                3 => three_eighths_span(&mut w, 0, 3),
                _ => match m % 4 {
                    0 => boole_span(&mut w, 0, m),
                    1 => {
                        boole_span(&mut w, 0, m - 5);
                        simpson_span(&mut w, m - 5, m - 3);
                        three_eighths_span(&mut w, m - 3, m);
                    }
                    2 => {
                        boole_span(&mut w, 0, m - 2);
                        simpson_span(&mut w, m - 2, m);
                    }
                    3 => {
                        boole_span(&mut w, 0, m - 3);
                        three_eighths_span(&mut w, m - 3, m);
                    }
                    _ => unreachable!(),
                },
            },
        }
        w
    }
}

fn trapezoid_span(w: &mut Vec<(usize, f64)>, a: usize, b: usize) {
    if b == a {
        return;
    }
    w.push((a, 0.5));
    for j in a + 1..b {
        w.push((j, 1.0));
    }
    w.push((b, 0.5));
}

fn simpson_span(w: &mut Vec<(usize, f64)>, a: usize, b: usize) {
    debug_assert!((b - a).is_multiple_of(2));
    let mut p = a;
    while p < b {
        w.push((p, 1.0 / 3.0));
        w.push((p + 1, 4.0 / 3.0));
        w.push((p + 2, 1.0 / 3.0));
        p += 2;
    }
}

fn three_eighths_span(w: &mut Vec<(usize, f64)>, a: usize, b: usize) {
    debug_assert_eq!(b - a, 3);
    w.push((a, 3.0 / 8.0));
    w.push((a + 1, 9.0 / 8.0));
    w.push((a + 2, 9.0 / 8.0));
    w.push((a + 3, 3.0 / 8.0));
}

fn boole_span(w: &mut Vec<(usize, f64)>, a: usize, b: usize) {
    debug_assert!((b - a).is_multiple_of(4));
    let mut q = a;
    while q < b {
        w.push((q, 14.0 / 45.0));
        w.push((q + 1, 64.0 / 45.0));
        w.push((q + 2, 24.0 / 45.0));
        w.push((q + 3, 64.0 / 45.0));
        w.push((q + 4, 14.0 / 45.0));
        q += 4;
    }
}

/// Cubic rule for the first panel using the three nodes after it.
fn edge_panel(w: &mut Vec<(usize, f64)>) {
    w.push((0, 9.0 / 24.0));
    w.push((1, 19.0 / 24.0));
    w.push((2, -5.0 / 24.0));
    w.push((3, 1.0 / 24.0));
}

/// Which operator propagates and which one forces a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepSide {
    /// A-propagated, B-forced.
    Odd,
    /// B-propagated, A-forced.
    Even,
}

impl SweepSide {
    /// Iterations alternate Odd, Even, Odd, … starting Odd at i = 1.
    pub fn for_iteration(i: usize) -> Self {
        debug_assert!(i >= 1);
        if i % 2 == 1 {
            SweepSide::Odd
        } else {
            SweepSide::Even
        }
    }
}

/// One iterate sampled on the uniform intra-step node grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateGrid {
    t_start: f64,
    length: f64,
    values: Vec<Vector>,
}

impl IterateGrid {
    /// The `c_0 ≡ 0` initialization.
    pub fn zero(t_start: f64, length: f64, panels: usize, dim: usize) -> Result<Self> {
        if panels == 0 {
            return Err(Error::GridIncompatible("grid needs at least one panel".into()));
        }
        if !(length > 0.0) || !t_start.is_finite() {
            return Err(Error::InvalidParameter("step interval must have positive length".into()));
        }
        Ok(Self {
            t_start,
            length,
            values: vec![Vector::zeros(dim); panels + 1],
        })
    }

    pub fn from_values(t_start: f64, length: f64, values: Vec<Vector>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::GridIncompatible("grid needs at least one panel".into()));
        }
        if !(length > 0.0) || !t_start.is_finite() {
            return Err(Error::InvalidParameter("step interval must have positive length".into()));
        }
        let dim = values[0].len();
        if values.iter().any(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch("iterate values of unequal length".into()));
        }
        Ok(Self { t_start, length, values })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    /// Step length tau.
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn panels(&self) -> usize {
        self.values.len() - 1
    }

    /// Node spacing h = tau / panels.
    pub fn spacing(&self) -> f64 {
        self.length / self.panels() as f64
    }

    pub fn node_time(&self, j: usize) -> f64 {
        self.t_start + self.length * j as f64 / self.panels() as f64
    }

    pub fn values(&self) -> &[Vector] {
        &self.values
    }

    pub fn value(&self, j: usize) -> &Vector {
        &self.values[j]
    }

    pub fn final_value(&self) -> &Vector {
        self.values.last().expect("grid is never empty")
    }
}

/// Table of propagator powers exp(P·k·h) for one operator and spacing.
///
/// Holds two backward factors exp(-P·h), exp(-2P·h) for the edge rule, which
/// evaluates the kernel at small negative lags.
#[derive(Debug, Clone)]
pub struct PropagatorTable {
    spacing: f64,
    forward: Vec<Matrix>,
    backward: [Matrix; 2],
}

impl PropagatorTable {
    pub fn build(op: &Matrix, spacing: f64, panels: usize) -> Result<Self> {
        if !op.is_square() {
            return Err(Error::DimensionMismatch("propagated operator must be square".into()));
        }
        let step = op.expm(spacing)?;
        let mut forward = Vec::with_capacity(panels + 1);
        forward.push(Matrix::identity(op.rows()));
        for k in 1..=panels {
            let next = forward[k - 1].mat_mul(&step)?;
            forward.push(next);
        }
        let back1 = op.expm(-spacing)?;
        let back2 = back1.mat_mul(&back1)?;
        Ok(Self { spacing, forward, backward: [back1, back2] })
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn panels(&self) -> usize {
        self.forward.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.forward[0].rows()
    }

    /// exp(P·lag·h); lag may be -1 or -2 for the edge rule.
    fn kernel(&self, lag: isize) -> &Matrix {
        if lag >= 0 {
            &self.forward[lag as usize]
        } else {
            &self.backward[(-lag) as usize - 1]
        }
    }
}

/// Runs one iteration sweep on the node grid of `prev`.
///
/// `c_n` is the step's initial state; the returned grid satisfies
/// `values[0] == c_n` bit-exactly. Node m combines the propagated initial
/// state with composite quadrature of `exp(P (s_m - s_j)) Q prev[j]`.
pub fn sweep(
    a: &Matrix,
    b: &Matrix,
    prev: &IterateGrid,
    c_n: &Vector,
    side: SweepSide,
    rule: QuadRule,
) -> Result<IterateGrid> {
    let dim = check_operator_pair(a, b)?;
    if c_n.len() != dim || prev.value(0).len() != dim {
        return Err(Error::DimensionMismatch(
            "state dimension does not match the operators".into(),
        ));
    }
    rule.check_grid(prev.panels())?;
    let (propagated, forcing) = match side {
        SweepSide::Odd => (a, b),
        SweepSide::Even => (b, a),
    };
    let table = PropagatorTable::build(propagated, prev.spacing(), prev.panels())?;
    sweep_with_table(&table, forcing, prev, c_n, rule)
}

pub(crate) fn check_operator_pair(a: &Matrix, b: &Matrix) -> Result<usize> {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "operators must be square and of equal size, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(a.rows())
}

pub(crate) fn sweep_with_table(
    table: &PropagatorTable,
    forcing: &Matrix,
    prev: &IterateGrid,
    c_n: &Vector,
    rule: QuadRule,
) -> Result<IterateGrid> {
    let panels = prev.panels();
    if table.panels() < panels {
        return Err(Error::GridIncompatible("propagator table shorter than the grid".into()));
    }
    let h = prev.spacing();
    let forced: Vec<Vector> = prev
        .values()
        .iter()
        .map(|v| forcing.mat_apply(v))
        .collect::<Result<_>>()?;

    let mut values = Vec::with_capacity(panels + 1);
    values.push(c_n.clone());
    for m in 1..=panels {
        let mut acc = table.forward[m].mat_apply(c_n)?;
        for (j, weight) in rule.assembly(m) {
            let lag = m as isize - j as isize;
            table.kernel(lag).apply_scaled_add(&forced[j], weight * h, &mut acc);
        }
        values.push(acc);
    }
    IterateGrid::from_values(prev.t_start(), prev.length(), values)
}

/// Number of grid panels per step, requiring h to divide tau.
pub fn panels_per_step(tau: f64, h: f64) -> Result<usize> {
    if !(tau > 0.0) || !(h > 0.0) || !tau.is_finite() || !h.is_finite() {
        return Err(Error::InvalidParameter("tau and h must be positive and finite".into()));
    }
    let ratio = tau / h;
    let rounded = ratio.round();
    if rounded < 1.0 || (ratio - rounded).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::GridIncompatible(format!(
            "spacing h = {h:e} does not divide the step length tau = {tau:e}"
        )));
    }
    Ok(rounded as usize)
}

/// Advances the problem over `[t0, T]` with `partitions` equal splitting steps
/// of `iterations` alternating sweeps each, and returns the state at every
/// partition boundary (including t0).
pub fn iterative_split_trajectory(
    problem: &SplitProblem,
    partitions: usize,
    iterations: usize,
    rule: QuadRule,
    h: f64,
) -> Result<Vec<(f64, Vector)>> {
    if partitions == 0 {
        return Err(Error::InvalidParameter("partitions must be at least 1".into()));
    }
    if iterations == 0 {
        return Err(Error::InvalidParameter("iterations must be at least 1".into()));
    }
    let t0 = problem.t_start();
    let span = problem.t_end() - t0;
    let tau = span / partitions as f64;
    let panels = panels_per_step(tau, h)?;
    rule.check_grid(panels)?;
    let spacing = tau / panels as f64;
    let dim = problem.initial_state().len();

    // Constant operators share one propagator table across all steps.
    let cached_a = match problem.operator_a().constant() {
        Some(m) => Some(PropagatorTable::build(m, spacing, panels)?),
        None => None,
    };
    let cached_b = match problem.operator_b().constant() {
        Some(m) => Some(PropagatorTable::build(m, spacing, panels)?),
        None => None,
    };

    let mut state = problem.initial_state().clone();
    let mut out = Vec::with_capacity(partitions + 1);
    out.push((t0, state.clone()));
    for n in 0..partitions {
        let t_n = t0 + span * n as f64 / partitions as f64;
        let t_next = t0 + span * (n + 1) as f64 / partitions as f64;
        let (a, b) = problem.frozen_operators(t_n, t_next)?;
        check_operator_pair(&a, &b)?;
        if a.rows() != dim {
            return Err(Error::DimensionMismatch(
                "operator size does not match the initial state".into(),
            ));
        }
        let fresh_a;
        let table_a: &PropagatorTable = match &cached_a {
            Some(t) => t,
            None => {
                fresh_a = PropagatorTable::build(&a, spacing, panels)?;
                &fresh_a
            }
        };
        let fresh_b;
        let table_b: &PropagatorTable = match &cached_b {
            Some(t) => t,
            None => {
                fresh_b = PropagatorTable::build(&b, spacing, panels)?;
                &fresh_b
            }
        };

        let mut iterate = IterateGrid::zero(t_n, tau, panels, dim)?;
        for i in 1..=iterations {
            iterate = match SweepSide::for_iteration(i) {
                SweepSide::Odd => sweep_with_table(table_a, &b, &iterate, &state, rule)?,
                SweepSide::Even => sweep_with_table(table_b, &a, &iterate, &state, rule)?,
            };
        }
        state = iterate.final_value().clone();
        out.push((t_next, state.clone()));
    }
    Ok(out)
}

/// State at the final time T; see [`iterative_split_trajectory`].
pub fn iterative_split_solve(
    problem: &SplitProblem,
    partitions: usize,
    iterations: usize,
    rule: QuadRule,
    h: f64,
) -> Result<Vector> {
    let mut trajectory = iterative_split_trajectory(problem, partitions, iterations, rule, h)?;
    Ok(trajectory.pop().expect("trajectory holds at least t0").1)
}
