//! Acceptance suite: one test per criterion, each printing its one-line
//! pass/fail report (visible with `cargo test -- --nocapture`).

use gcltlab_core::acceptance::{run_criterion, CriterionOutcome};

fn check(index: usize) {
    let outcome: CriterionOutcome = run_criterion(index);
    println!("{}", outcome.line());
    assert!(outcome.passed, "{}", outcome.line());
}

#[test]
fn criterion_01_variance_duality() {
    check(1);
}

#[test]
fn criterion_02_dp_vs_brute_force_oracle() {
    check(2);
}

#[test]
fn criterion_03_conditional_sandwich_invariants() {
    check(3);
}

#[test]
fn criterion_04_lln_convergence() {
    check(4);
}

#[test]
fn criterion_05_clt_classical_reduction() {
    check(5);
}

#[test]
fn criterion_06_clt_under_mean_uncertainty() {
    check(6);
}

#[test]
fn criterion_07_limit_solver_cross_oracle() {
    check(7);
}

#[test]
fn criterion_08_capacity_bracket() {
    check(8);
}

#[test]
fn criterion_09_heavy_tail_clt_failure() {
    check(9);
}

#[test]
fn criterion_10_monte_carlo_lower_bound() {
    check(10);
}
