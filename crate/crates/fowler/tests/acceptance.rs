//! Acceptance suite: one test per criterion, each printing its pass/fail
//! line. The same checks run from the CLI via `fowler verify`.

use fowler::verify::run_suite;

fn check(index: usize, name: &str) {
    let results = run_suite(name).expect("suite runs to completion");
    assert_eq!(results.len(), 1);
    let r = &results[0];
    println!("ACCEPTANCE {index}: {}", r.line());
    assert!(r.pass, "{}", r.line());
}

#[test]
fn criterion_1_closed_form_orbit_residual() {
    check(1, "sech-residual");
}

#[test]
fn criterion_2_hamiltonian_conservation() {
    check(2, "hamiltonian");
}

#[test]
fn criterion_3_pohozaev_dichotomy() {
    check(3, "pohozaev-dichotomy");
}

#[test]
fn criterion_4_shooting_consistency() {
    check(4, "shooting");
}

#[test]
fn criterion_5_kelvin_identity() {
    check(5, "kelvin");
}

#[test]
fn criterion_6_sobolev_integral_identity() {
    check(6, "sobolev-identity");
}

#[test]
fn criterion_7_qualitative_bound_monitors() {
    check(7, "monitors");
}

#[test]
fn criterion_8_vector_structure() {
    check(8, "vector-structure");
}

#[test]
fn extra_three_spheres_comparison() {
    check(9, "three-spheres");
}
