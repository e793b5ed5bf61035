//! Iterative operator-splitting integrators for linear evolution equations
//! u' = (A + B) u.
//!
//! Each splitting step runs a fixed number of alternating iteration sweeps:
//! the odd sweeps propagate with A and treat B·(previous iterate) as a
//! forcing term, the even sweeps swap the roles. The variation-of-constants
//! integral behind each sweep is evaluated by composite Newton–Cotes rules
//! (trapezoid, Simpson, Boole) on a uniform intra-step grid, so the global
//! accuracy grows by one order per iteration until the quadrature floor.
//!
//! Beyond the integrator, the crate carries the surrounding machinery:
//!
//! - [`linalg`]: small dense matrices, `expm` via Padé(6,6) scaling and
//!   squaring, pivoted-LU inverses;
//! - [`splitting`]: sweeps, the outer solver, φ-functions, closed-form
//!   low-order iterates via the Laplace route, and the block propagator of
//!   the coupled iterate chain;
//! - [`problems`]: a 2x2 model ODE with a closed-form solution and the
//!   radial oscillator with a time-dependent spring constant;
//! - [`harness`]: convergence studies (iterations × partitions), empirical
//!   order fits, CSV and plot-data output;
//! - [`checks`]: seeded residual suites for the CLI.
//!
//! ```
//! use splitstep::{dahlquist_2x2, exact_solution_2x2, iterative_split_solve, QuadRule};
//!
//! let problem = dahlquist_2x2(0.25, 0.5).unwrap();
//! let state = iterative_split_solve(&problem, 10, 4, QuadRule::Bode, 1e-3).unwrap();
//! let exact = exact_solution_2x2(0.25, 0.5, 1.0).unwrap();
//! assert!((state.get(0) - exact.get(0)).abs() < 1e-6);
//! ```

// Validation sites use `!(x > 0.0)` on purpose: the negated comparison also
// rejects NaN arguments.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod problems;
pub mod splitting;

pub use error::{Error, Result};
pub use harness::{
    emit_csv, emit_order_plot_data, estimate_order, parse_csv, run_study, ConvergenceReport,
    Reference, Row, StudyConfig, StudyProblem,
};
pub use linalg::{max_abs_err, Matrix, Vector};
pub use problems::{
    dahlquist_2x2, exact_solution_2x2, oscillator_energy, oscillator_rotation, radial_oscillator,
    FreezePolicy, OperatorSpec, OscillatorSpec, SplitProblem,
};
pub use splitting::{
    block_semigroup_propagator, chain_generator, iterative_split_solve,
    iterative_split_trajectory, laplace_c2, laplace_c3, panels_per_step, phi_k, sweep,
    IterateGrid, PropagatorTable, QuadRule, SweepSide,
};
