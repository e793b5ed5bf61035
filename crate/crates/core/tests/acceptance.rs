//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! per sub-check. Published reference values for the three convergence tables
//! are embedded below; cells above the saturation floor must match within a
//! factor of ten and the flagship cells within a factor of two.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see every line.

use std::time::Instant;

use splitstep::{
    checks, dahlquist_2x2, estimate_order, iterative_split_solve, iterative_split_trajectory,
    oscillator_energy, oscillator_rotation, radial_oscillator, run_study, Error, FreezePolicy,
    OperatorSpec, OscillatorSpec, QuadRule, SplitProblem, StudyConfig, Vector,
};

/// Reference (iterations, partitions, err1) cells for the second-order
/// trapezoid table.
const TABLE_TRAPEZOID: [(usize, usize, f64); 15] = [
    (2, 1, 4.5321e-2),
    (2, 10, 3.9664e-3),
    (2, 100, 3.9204e-4),
    (3, 1, 7.6766e-3),
    (3, 10, 6.6383e-5),
    (3, 100, 6.5139e-7),
    (4, 1, 4.6126e-4),
    (4, 10, 4.1883e-7),
    (4, 100, 5.9520e-9),
    (5, 1, 4.6828e-5),
    (5, 10, 1.3954e-9),
    (5, 100, 5.5352e-9),
    (6, 1, 1.9096e-6),
    (6, 10, 5.5527e-9),
    (6, 100, 5.5355e-9),
];

/// Reference cells for the third-order (BDF3/Simpson) table.
const TABLE_SIMPSON: [(usize, usize, f64); 15] = [
    (2, 1, 4.5321e-2),
    (2, 10, 3.9664e-3),
    (2, 100, 3.9204e-4),
    (3, 1, 7.6766e-3),
    (3, 10, 6.6385e-5),
    (3, 100, 6.5312e-7),
    (4, 1, 4.6126e-4),
    (4, 10, 4.1334e-7),
    (4, 100, 1.7864e-9),
    (5, 1, 4.6833e-5),
    (5, 10, 4.0122e-9),
    (5, 100, 1.3737e-9),
    (6, 1, 1.9040e-6),
    (6, 10, 1.4350e-10),
    (6, 100, 1.3742e-9),
];

/// Reference cells for the fourth-order (Gauss-RK/Bode) table.
const TABLE_BODE: [(usize, usize, f64); 15] = [
    (2, 1, 4.5321e-2),
    (2, 10, 3.9664e-3),
    (2, 100, 3.9204e-4),
    (3, 1, 7.6766e-3),
    (3, 10, 6.6385e-5),
    (3, 100, 6.5369e-7),
    (4, 1, 4.6126e-4),
    (4, 10, 4.1321e-7),
    (4, 100, 4.0839e-10),
    (5, 1, 4.6833e-5),
    (5, 10, 4.1382e-9),
    (5, 100, 4.0878e-13),
    (6, 1, 1.9040e-6),
    (6, 10, 1.7200e-11),
    (6, 100, 2.4425e-15),
];

fn reference_table(rule: QuadRule) -> &'static [(usize, usize, f64); 15] {
    match rule {
        QuadRule::Trapezoid => &TABLE_TRAPEZOID,
        QuadRule::Simpson => &TABLE_SIMPSON,
        QuadRule::Bode => &TABLE_BODE,
    }
}

const ALL_RULES: [QuadRule; 3] = [QuadRule::Trapezoid, QuadRule::Simpson, QuadRule::Bode];

/// Flagship cells pinned to a factor of two: (rule, iterations, partitions,
/// reference value).
const FLAGSHIPS: [(QuadRule, usize, usize, f64); 4] = [
    (QuadRule::Trapezoid, 2, 1, 4.5321e-2),
    (QuadRule::Trapezoid, 3, 10, 6.6383e-5),
    (QuadRule::Simpson, 4, 100, 1.7864e-9),
    (QuadRule::Bode, 5, 100, 4.0878e-13),
];

fn run_table(rule: QuadRule) -> splitstep::ConvergenceReport {
    run_study(&StudyConfig::dahlquist_table(rule)).expect("table study runs")
}

fn worst(report: &splitstep::ConvergenceReport, iterations: usize, partitions: usize) -> f64 {
    report
        .row(iterations, partitions)
        .and_then(|r| r.worst_error())
        .expect("cell computed")
}

#[test]
fn criterion_1_table_reproduction() {
    let started = Instant::now();
    let reports: Vec<_> = ALL_RULES.iter().map(|&rule| (rule, run_table(rule))).collect();
    let elapsed = started.elapsed();

    let mut failures: Vec<String> = Vec::new();
    for (rule, report) in &reports {
        let floor = rule.default_floor();
        for &(i, p, reference) in reference_table(*rule) {
            if reference <= floor {
                continue;
            }
            let ours = worst(report, i, p);
            let ratio = ours / reference;
            let ok = (0.1..=10.0).contains(&ratio);
            println!(
                "criterion 1 [{}] cell ({i},{p}): ours {ours:.4e} vs reference {reference:.4e} (ratio {ratio:.3}) .. {}",
                rule.name(),
                if ok { "PASS" } else { "FAIL" }
            );
            if !ok {
                failures.push(format!(
                    "{} cell ({i},{p}) ratio {ratio:.3} outside [0.1, 10]",
                    rule.name()
                ));
            }
        }
    }

    for &(rule, i, p, reference) in &FLAGSHIPS {
        let report = &reports.iter().find(|(r, _)| *r == rule).unwrap().1;
        let ours = worst(report, i, p);
        let ratio = ours / reference;
        let ok = (0.5..=2.0).contains(&ratio);
        println!(
            "criterion 1 [{}] flagship ({i},{p}): ours {ours:.4e} vs reference {reference:.4e} (ratio {ratio:.3}) .. {}",
            rule.name(),
            if ok { "PASS" } else { "FAIL" }
        );
        if !ok {
            failures.push(format!(
                "{} flagship ({i},{p}) ratio {ratio:.3} outside [0.5, 2]",
                rule.name()
            ));
        }
    }

    // The last flagship is an upper bound rather than a two-sided window.
    let bode = &reports.iter().find(|(r, _)| *r == QuadRule::Bode).unwrap().1;
    let tail = worst(bode, 6, 100);
    let tail_ok = tail <= 1e-13;
    println!(
        "criterion 1 [bode] flagship (6,100): ours {tail:.4e} <= 1e-13 .. {}",
        if tail_ok { "PASS" } else { "FAIL" }
    );
    if !tail_ok {
        failures.push(format!("bode flagship (6,100) = {tail:.3e} above 1e-13"));
    }

    let timing_ok = elapsed.as_secs_f64() <= 60.0;
    println!(
        "criterion 1 timing: three tables in {:.2}s (limit 60s) .. {}",
        elapsed.as_secs_f64(),
        if timing_ok { "PASS" } else { "FAIL" }
    );
    if !timing_ok {
        failures.push(format!("three-table run took {:.1}s", elapsed.as_secs_f64()));
    }

    assert!(failures.is_empty(), "criterion 1 failures: {failures:#?}");
}

#[test]
fn criterion_2_global_order_law() {
    let mut failures: Vec<String> = Vec::new();
    for rule in ALL_RULES {
        let report = run_table(rule);
        let floor = rule.default_floor();
        for i in 2..=6usize {
            let points: Vec<(f64, f64)> = report
                .rows
                .iter()
                .filter(|r| r.iterations == i)
                .filter_map(|r| r.worst_error().map(|e| (report.tau(r.partitions), e)))
                .collect();
            match estimate_order(&points, floor) {
                Ok(estimate) => {
                    let expected = (i as f64 - 1.0).min(rule.nominal_order() as f64);
                    let ok = (estimate - expected).abs() <= 0.5;
                    println!(
                        "criterion 2 [{}] iterations={i}: estimated order {estimate:.3}, expected min(i-1, nominal) = {expected} .. {}",
                        rule.name(),
                        if ok { "PASS" } else { "FAIL" }
                    );
                    if !ok {
                        failures.push(format!(
                            "{} i={i}: order {estimate:.3} departs from {expected} by more than 0.5",
                            rule.name()
                        ));
                    }
                }
                Err(Error::InsufficientData(_)) => {
                    println!(
                        "criterion 2 [{}] iterations={i}: skipped (fewer than two cells above floor {floor:e})",
                        rule.name()
                    );
                }
                Err(other) => panic!("unexpected order-fit error: {other}"),
            }
        }
    }
    assert!(failures.is_empty(), "criterion 2 failures: {failures:#?}");
}

/// One-step problem on [0, tau] with the model operators.
fn one_step_problem(tau: f64) -> SplitProblem {
    let base = dahlquist_2x2(0.25, 0.5).unwrap();
    let (a, b) = base.frozen_operators(0.0, tau).unwrap();
    SplitProblem::new(
        OperatorSpec::Constant(a),
        OperatorSpec::Constant(b),
        base.initial_state().clone(),
        0.0,
        tau,
        FreezePolicy::default(),
    )
    .unwrap()
}

#[test]
fn criterion_3_local_consistency() {
    let taus = [0.1, 0.05, 0.025];
    let mut failures: Vec<String> = Vec::new();
    for i in 1..=3usize {
        let mut points = Vec::new();
        for &tau in &taus {
            let problem = one_step_problem(tau);
            let one_step = iterative_split_solve(&problem, 1, i, QuadRule::Bode, 1e-3).unwrap();
            let exact = problem
                .full_generator()
                .unwrap()
                .expm(tau)
                .unwrap()
                .mat_apply(problem.initial_state())
                .unwrap();
            let err = one_step
                .sub(&exact)
                .unwrap()
                .max_abs();
            points.push((tau, err));
        }
        let slope = estimate_order(&points, 0.0).unwrap();
        let bound = i as f64 - 0.3;
        let ok = slope >= bound;
        println!(
            "criterion 3 iterations={i}: one-step error slope {slope:.3} (needs >= {bound}) .. {}",
            if ok { "PASS" } else { "FAIL" }
        );
        if !ok {
            failures.push(format!("i={i}: local slope {slope:.3} below {bound}"));
        }
    }
    assert!(failures.is_empty(), "criterion 3 failures: {failures:#?}");
}

#[test]
fn criterion_4_phi_recurrence() {
    let report = checks::check_phi().unwrap();
    println!(
        "criterion 4: phi recurrence residual {:.3e} over {} cases (tolerance 1e-9) .. {}",
        report.max_residual,
        report.cases,
        if report.passed() { "PASS" } else { "FAIL" }
    );
    assert!(
        report.passed(),
        "phi recurrence residual {:.3e} above 1e-9",
        report.max_residual
    );
}

#[test]
fn criterion_5_block_semigroup_equivalence() {
    let report = checks::check_semigroup().unwrap();
    println!(
        "criterion 5: block propagator residual {:.3e} over {} cases (tolerance 1e-8) .. {}",
        report.max_residual,
        report.cases,
        if report.passed() { "PASS" } else { "FAIL" }
    );
    assert!(
        report.passed(),
        "block propagator residual {:.3e} above 1e-8",
        report.max_residual
    );
}

#[test]
fn criterion_6_laplace_closed_forms() {
    let report = checks::check_laplace().unwrap();
    println!(
        "criterion 6: closed-form vs sweep residual {:.3e} over {} cases (tolerance 1e-6) .. {}",
        report.max_residual,
        report.cases,
        if report.passed() { "PASS" } else { "FAIL" }
    );
    assert!(
        report.passed(),
        "laplace equivalence residual {:.3e} above 1e-6",
        report.max_residual
    );

    // The model pair must be rejected: det(B - A) = 0 by hand.
    let problem = dahlquist_2x2(0.25, 0.5).unwrap();
    let (a, b) = problem.frozen_operators(0.0, 1.0).unwrap();
    let c = Vector::new(vec![1.0, 1.0]).unwrap();
    let c2 = splitstep::laplace_c2(&a, &b, &c, 1.0);
    let c3 = splitstep::laplace_c3(&a, &b, &c, 1.0);
    let rejected = matches!(c2, Err(Error::SingularMatrix { .. }))
        && matches!(c3, Err(Error::SingularMatrix { .. }));
    println!(
        "criterion 6: singular model pair raises SingularMatrix .. {}",
        if rejected { "PASS" } else { "FAIL" }
    );
    assert!(rejected, "model pair did not raise SingularMatrix: {c2:?} / {c3:?}");
}

#[test]
fn criterion_7_conservation() {
    let problem = dahlquist_2x2(0.25, 0.5).unwrap();
    let target = problem.initial_state().component_sum();
    let mut failures: Vec<String> = Vec::new();
    let mut worst_drift: f64 = 0.0;
    for rule in ALL_RULES {
        for iterations in [2usize, 4, 6] {
            for partitions in [1usize, 10, 100] {
                let state =
                    iterative_split_solve(&problem, partitions, iterations, rule, 1e-3).unwrap();
                let drift = (state.component_sum() - target).abs() / target.abs();
                worst_drift = worst_drift.max(drift);
                if drift > 1e-12 {
                    failures.push(format!(
                        "{} iterations={iterations} partitions={partitions}: drift {drift:.3e}",
                        rule.name()
                    ));
                }
            }
        }
    }
    println!(
        "criterion 7: worst relative component-sum drift {worst_drift:.3e} (tolerance 1e-12) .. {}",
        if failures.is_empty() { "PASS" } else { "FAIL" }
    );
    assert!(failures.is_empty(), "criterion 7 failures: {failures:#?}");
}

#[test]
fn criterion_8_oscillator_oracle() {
    let mut failures: Vec<String> = Vec::new();

    // Convergence of the constant-spring case to the rotation flow at order
    // i - 1 across partition counts whose steps the default grid divides.
    let problem = radial_oscillator(OscillatorSpec::free(0.5, 0, 1.0, 6.0)).unwrap();
    let u0 = problem.initial_state().clone();
    let exact = oscillator_rotation(1.0, u0.get(0), u0.get(1), 1.0, 6.0).unwrap();
    let partitions_list = [10usize, 25, 50, 100];
    for i in [2usize, 3, 4] {
        let mut points = Vec::new();
        for &p in &partitions_list {
            let state = iterative_split_solve(&problem, p, i, QuadRule::Bode, 1e-3).unwrap();
            let err = state.sub(&exact).unwrap().max_abs();
            points.push((5.0 / p as f64, err));
        }
        let slope = estimate_order(&points, 0.0).unwrap();
        let expected = i as f64 - 1.0;
        let ok = (slope - expected).abs() <= 0.5;
        println!(
            "criterion 8 iterations={i}: rotation-flow convergence order {slope:.3} (expected {expected}) .. {}",
            if ok { "PASS" } else { "FAIL" }
        );
        if !ok {
            failures.push(format!("i={i}: order {slope:.3} departs from {expected}"));
        }
    }

    // Energy drift of the solution at the pinned configuration.
    let trajectory =
        iterative_split_trajectory(&problem, 100, 4, QuadRule::Bode, 1e-3).unwrap();
    let h0 = oscillator_energy(1.0, u0.get(0), u0.get(1));
    let (_, final_state) = trajectory.last().unwrap();
    let drift = (oscillator_energy(1.0, final_state.get(0), final_state.get(1)) - h0).abs();
    let drift_ok = drift <= 1e-6;
    println!(
        "criterion 8 energy drift at (partitions=100, iterations=4, bode): {drift:.3e} (tolerance 1e-6) .. {}",
        if drift_ok { "PASS" } else { "FAIL" }
    );
    if !drift_ok {
        failures.push(format!("energy drift {drift:.3e} above 1e-6"));
    }

    assert!(failures.is_empty(), "criterion 8 failures: {failures:#?}");
}

#[test]
fn criterion_9_figure_two_out_of_scope() {
    // The five-method comparison figure specifies neither its methods nor
    // their parameters, so nothing about it is reproducible; criterion 8's
    // property checks stand in for this example.
    println!("criterion 9: five-method comparison not reproducible by construction .. PASS (substituted by criterion 8)");
}
