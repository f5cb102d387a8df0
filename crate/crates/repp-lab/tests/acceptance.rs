//! Acceptance battery: each criterion runs at its pinned scale and seed
//! and prints one PASS/FAIL line (use `--nocapture` to see them as they
//! finish). The same battery backs `repp-lab compare --suite acceptance`.

use repp_lab::suite::run_criterion;

fn check(id: u32) {
    let outcome = run_criterion(id);
    println!("{}", outcome.summary_line());
    assert!(outcome.passed, "{}", outcome.summary_line());
}

#[test]
fn c01_extremal_index_doubling() {
    check(1);
}

#[test]
fn c02_extremal_index_tripling() {
    check(2);
}

#[test]
fn c03_extremal_index_torus() {
    check(3);
}

#[test]
fn c04_geometric_cluster_sizes() {
    check(4);
}

#[test]
fn c05_void_probability_grid() {
    check(5);
}

#[test]
fn c06_stack_ratio() {
    check(6);
}

#[test]
fn c07_sampler_self_consistency() {
    check(7);
}

#[test]
fn c08_outer_measure_agreement() {
    check(8);
}

#[test]
fn c09_extremal_process_fdd() {
    check(9);
}

#[test]
fn c10_record_counts_non_periodic() {
    check(10);
}

#[test]
fn c11_two_site_battery() {
    check(11);
}

#[test]
fn c12_short_return_ladder() {
    check(12);
}

#[test]
fn c13_void_proximity_bound() {
    check(13);
}

#[test]
fn c14_record_projection_discontinuity() {
    check(14);
}

#[test]
fn c15_reproducibility() {
    check(15);
}
