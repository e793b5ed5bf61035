//! Convergence-study harness: sweeps (iterations × partitions) for a rule,
//! measures per-component errors against a reference solution at the final
//! time, fits empirical orders, and serializes the result.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{max_abs_err, Vector};
use crate::problems::{
    dahlquist_2x2, exact_solution_2x2, oscillator_rotation, radial_oscillator, OscillatorSpec,
    SplitProblem,
};
use crate::splitting::{iterative_split_solve, panels_per_step, QuadRule};

/// Problem selector for a study.
#[derive(Debug, Clone)]
pub enum StudyProblem {
    Dahlquist { lambda1: f64, lambda2: f64 },
    Oscillator { energy: f64, angular: u32, r_start: f64, r_end: f64 },
}

impl StudyProblem {
    fn build(&self) -> Result<SplitProblem> {
        match *self {
            StudyProblem::Dahlquist { lambda1, lambda2 } => dahlquist_2x2(lambda1, lambda2),
            StudyProblem::Oscillator { energy, angular, r_start, r_end } => {
                radial_oscillator(OscillatorSpec::free(energy, angular, r_start, r_end))
            }
        }
    }

    fn exact_at_end(&self, problem: &SplitProblem) -> Result<Vector> {
        match *self {
            StudyProblem::Dahlquist { lambda1, lambda2 } => {
                exact_solution_2x2(lambda1, lambda2, problem.t_end())
            }
            StudyProblem::Oscillator { energy, angular, .. } => {
                if angular != 0 {
                    return Err(Error::InvalidParameter(
                        "no exact formula for the oscillator with l > 0".into(),
                    ));
                }
                let u0 = problem.initial_state();
                oscillator_rotation(
                    2.0 * energy,
                    u0.get(0),
                    u0.get(1),
                    problem.t_start(),
                    problem.t_end(),
                )
            }
        }
    }
}

/// Reference solution a study measures errors against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    /// Closed-form solution of the problem.
    ExactFormula,
    /// expm(A + B, T) u0; constant problems only.
    ExpmFlow,
    /// A much finer solve: 16x the partitions, two extra iterations, Boole.
    FineSolve,
}

/// Full description of one convergence study.
#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub problem: StudyProblem,
    pub iterations: Vec<usize>,
    pub partitions: Vec<usize>,
    pub rule: QuadRule,
    pub h: f64,
    pub reference: Reference,
    /// Cells at or below this error level are excluded from order fits.
    pub floor: f64,
}

impl StudyConfig {
    /// The tables' default setup for a given rule: iterations 2..=6,
    /// partitions 1/10/100, h = 1e-3, errors against the closed form.
    pub fn dahlquist_table(rule: QuadRule) -> Self {
        Self {
            problem: StudyProblem::Dahlquist { lambda1: 0.25, lambda2: 0.5 },
            iterations: (2..=6).collect(),
            partitions: vec![1, 10, 100],
            rule,
            h: 1e-3,
            reference: Reference::ExactFormula,
            floor: rule.default_floor(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations.is_empty() || self.partitions.is_empty() {
            return Err(Error::InvalidParameter(
                "iteration and partition lists must be non-empty".into(),
            ));
        }
        if self.iterations.contains(&0) || self.partitions.contains(&0) {
            return Err(Error::InvalidParameter(
                "iteration and partition counts must be at least 1".into(),
            ));
        }
        let problem = self.problem.build()?;
        let span = problem.t_end() - problem.t_start();
        for &p in &self.partitions {
            let panels = panels_per_step(span / p as f64, self.h)?;
            self.rule.check_grid(panels)?;
        }
        Ok(())
    }
}

/// One study cell; `errors` is None when the solver failed for this cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub iterations: usize,
    pub partitions: usize,
    pub errors: Option<Vec<f64>>,
}

impl Row {
    pub fn worst_error(&self) -> Option<f64> {
        self.errors
            .as_ref()
            .map(|errs| errs.iter().cloned().fold(0.0, f64::max))
    }
}

/// Study output: rows sorted by (iterations, partitions) plus per-iteration
/// order estimates over the rows above the floor.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rule: QuadRule,
    pub span: f64,
    pub components: usize,
    pub floor: f64,
    pub rows: Vec<Row>,
    /// (iteration count, fitted order); None when fewer than two rows of that
    /// iteration count sit above the floor.
    pub orders: Vec<(usize, Option<f64>)>,
}

impl ConvergenceReport {
    pub fn tau(&self, partitions: usize) -> f64 {
        self.span / partitions as f64
    }

    pub fn row(&self, iterations: usize, partitions: usize) -> Option<&Row> {
        self.rows
            .iter()
            .find(|r| r.iterations == iterations && r.partitions == partitions)
    }
}

/// Runs every (iterations, partitions) cell of the study. Cells are
/// independent and evaluated in parallel; a failing cell is recorded as
/// failed instead of aborting the study.
pub fn run_study(cfg: &StudyConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let problem = cfg.problem.build()?;
    let span = problem.t_end() - problem.t_start();
    let components = problem.initial_state().len();

    let mut sorted_iterations = cfg.iterations.clone();
    sorted_iterations.sort_unstable();
    sorted_iterations.dedup();
    let mut sorted_partitions = cfg.partitions.clone();
    sorted_partitions.sort_unstable();
    sorted_partitions.dedup();

    let cells: Vec<(usize, usize)> = sorted_iterations
        .iter()
        .flat_map(|&i| sorted_partitions.iter().map(move |&p| (i, p)))
        .collect();

    let rows: Vec<Row> = cells
        .par_iter()
        .map(|&(iterations, partitions)| {
            let errors = evaluate_cell(cfg, &problem, iterations, partitions).ok();
            Row { iterations, partitions, errors }
        })
        .collect();

    let orders = sorted_iterations
        .iter()
        .map(|&i| {
            let points: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.iterations == i)
                .filter_map(|r| r.worst_error().map(|e| (span / r.partitions as f64, e)))
                .collect();
            (i, estimate_order(&points, cfg.floor).ok())
        })
        .collect();

    Ok(ConvergenceReport {
        rule: cfg.rule,
        span,
        components,
        floor: cfg.floor,
        rows,
        orders,
    })
}

fn evaluate_cell(
    cfg: &StudyConfig,
    problem: &SplitProblem,
    iterations: usize,
    partitions: usize,
) -> Result<Vec<f64>> {
    let solved = iterative_split_solve(problem, partitions, iterations, cfg.rule, cfg.h)?;
    let reference = reference_solution(cfg, problem, iterations, partitions)?;
    max_abs_err(&solved, &reference)
}

fn reference_solution(
    cfg: &StudyConfig,
    problem: &SplitProblem,
    iterations: usize,
    partitions: usize,
) -> Result<Vector> {
    match cfg.reference {
        Reference::ExactFormula => cfg.problem.exact_at_end(problem),
        Reference::ExpmFlow => {
            let span = problem.t_end() - problem.t_start();
            problem.full_generator()?.expm(span)?.mat_apply(problem.initial_state())
        }
        Reference::FineSolve => iterative_split_solve(
            problem,
            partitions * 16,
            iterations + 2,
            QuadRule::Bode,
            cfg.h / 16.0,
        ),
    }
}

/// Least-squares slope of log err against log tau over the points with
/// err > floor. Needs at least two usable points.
pub fn estimate_order(points: &[(f64, f64)], floor: f64) -> Result<f64> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(_, err)| err > floor)
        .map(|&(tau, err)| (tau.ln(), err.ln()))
        .collect();
    if usable.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "order fit needs at least 2 points above the floor {floor:e}, got {}",
            usable.len()
        )));
    }
    let n = usable.len() as f64;
    let mean_x = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = usable.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let var: f64 = usable.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    Ok(cov / var)
}

/// CSV with header `iterations,partitions,err1,err2,…`; errors printed with
/// 17 significant digits so parsing returns the exact values; failed cells
/// emit `NA`.
pub fn emit_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from("iterations,partitions");
    for k in 1..=report.components {
        out.push_str(&format!(",err{k}"));
    }
    out.push('\n');
    for row in &report.rows {
        out.push_str(&format!("{},{}", row.iterations, row.partitions));
        match &row.errors {
            Some(errs) => {
                for e in errs {
                    out.push_str(&format!(",{e:.16e}"));
                }
            }
            None => {
                for _ in 0..report.components {
                    out.push_str(",NA");
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Parses the `emit_csv` format back into rows. Lines starting with `#` are
/// skipped.
pub fn parse_csv(text: &str) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("iterations") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 3 {
            return Err(Error::InvalidParameter(format!("malformed CSV line {}", k + 1)));
        }
        let iterations = fields[0]
            .parse::<usize>()
            .map_err(|e| Error::InvalidParameter(format!("line {}: {e}", k + 1)))?;
        let partitions = fields[1]
            .parse::<usize>()
            .map_err(|e| Error::InvalidParameter(format!("line {}: {e}", k + 1)))?;
        let errors = if fields[2..].contains(&"NA") {
            None
        } else {
            Some(
                fields[2..]
                    .iter()
                    .map(|f| {
                        f.parse::<f64>()
                            .map_err(|e| Error::InvalidParameter(format!("line {}: {e}", k + 1)))
                    })
                    .collect::<Result<Vec<f64>>>()?,
            )
        };
        rows.push(Row { iterations, partitions, errors });
    }
    Ok(rows)
}

/// Tab-separated (tau, err) blocks, one per iteration count per report, each
/// under a comment header naming the rule. Blocks are separated by blank
/// lines, ready for external plotting tools.
pub fn emit_order_plot_data(reports: &[&ConvergenceReport]) -> String {
    let mut out = String::from("# convergence data blocks: tau<TAB>max_err, one block per iteration count\n");
    for report in reports {
        let mut iteration_counts: Vec<usize> = report.rows.iter().map(|r| r.iterations).collect();
        iteration_counts.sort_unstable();
        iteration_counts.dedup();
        for i in iteration_counts {
            out.push('\n');
            out.push_str(&format!("# rule={} iterations={i}\n", report.rule.name()));
            for row in report.rows.iter().filter(|r| r.iterations == i) {
                if let Some(err) = row.worst_error() {
                    out.push_str(&format!("{:e}\t{:e}\n", report.tau(row.partitions), err));
                }
            }
        }
    }
    out
}
