//! The verification suite as a test target: one test per numbered check,
//! each printing its pass/fail line. Run with `cargo test --test acceptance`
//! (the `-- --nocapture` flag shows the lines for passing checks too).

use cheaptalk::verify;

fn run(criterion: fn(&cheaptalk::model::GameSpec) -> verify::CriterionResult) {
    let baseline = verify::reference_baseline();
    let result = criterion(&baseline);
    println!("{}", result.line());
    assert!(result.passed, "{}", result.line());
}

#[test]
fn check_01_probability_identities() {
    run(verify::criterion_01);
}

#[test]
fn check_02_no_low_signal_approval() {
    run(verify::criterion_02);
}

#[test]
fn check_03_sender_optimal_cutoffs_and_welfare_order() {
    run(verify::criterion_03);
}

#[test]
fn check_04_all_or_nothing_without_disagreement() {
    run(verify::criterion_04);
}

#[test]
fn check_05_discontinuity_at_small_disagreement_mass() {
    run(verify::criterion_05);
}

#[test]
fn check_06_vanishing_x_bounded_totals_gap_floor() {
    run(verify::criterion_06);
}

#[test]
fn check_07_persistence_regime_and_critical_mass() {
    run(verify::criterion_07);
}

#[test]
fn check_08_comparative_statics_and_index() {
    run(verify::criterion_08);
}

#[test]
fn check_09_randomized_mechanism_convergence() {
    run(verify::criterion_09);
}

#[test]
fn check_10_divergence_points_and_pivotal_decay() {
    run(verify::criterion_10);
}

#[test]
fn check_11_monte_carlo_coherence() {
    run(verify::criterion_11);
}

#[test]
fn check_12_byte_identical_reruns() {
    run(verify::criterion_12);
}
