//! Cross-route checks of the variance computations.

use std::f64::consts::PI;

use zerovar::geometry::TestForm;
use zerovar::specfun::riemann_zeta;
use zerovar::variance::{
    asymptotic_coefficients, asymptotic_variance, coefficient_integrals, exact_variance, fit_expansion,
    zonal_variance_oracle, QuadratureSpec, Route,
};

#[test]
fn fitted_subleading_coefficient_matches_curvature_prediction() {
    let psi1 = TestForm::by_name("psi1").unwrap();
    let spec = QuadratureSpec::default();
    let data: Vec<(f64, f64)> = [100u32, 150, 200, 300, 400]
        .iter()
        .map(|&k| (k as f64, exact_variance(&psi1, k, &spec).unwrap().value))
        .collect();
    let fit = fit_expansion(&data).unwrap();
    let a1 = -4.0 * riemann_zeta(4.0).unwrap();
    assert!((a1 + 2.0 * PI.powi(4) / 45.0).abs() < 1e-12);
    assert!((fit.a1_hat / a1 - 1.0).abs() < 0.15, "{fit:?}");
    assert!((fit.a0_hat / (4.0 * riemann_zeta(3.0).unwrap() / 3.0) - 1.0).abs() < 0.01);
}

#[test]
fn asymptotic_route_approaches_exact_route() {
    let tf = TestForm::by_name("quadrupole").unwrap();
    let spec = QuadratureSpec::default();
    let mut prev_gap = f64::INFINITY;
    for k in [50u32, 100, 200] {
        let exact = exact_variance(&tf, k, &spec).unwrap();
        let asym = asymptotic_variance(&tf, k).unwrap();
        assert_eq!(asym.route, Route::Asymptotic);
        // the gap is O(k^-3), so k^2·gap/value shrinks
        let gap = (exact.value - asym.value).abs() / exact.value * (k as f64).powi(2);
        assert!(gap < prev_gap, "k={k}: {gap} !< {prev_gap}");
        prev_gap = gap;
    }
}

#[test]
fn exact_route_matches_zonal_series_for_every_eigenform() {
    let spec = QuadratureSpec::default();
    for name in ["psi1", "psi2", "quadrupole"] {
        let tf = TestForm::by_name(name).unwrap();
        for k in [3u32, 40] {
            let exact = exact_variance(&tf, k, &spec).unwrap().value;
            let oracle = zonal_variance_oracle(&tf, k).unwrap();
            assert!((exact / oracle - 1.0).abs() < 1e-6, "{name} k={k}: {exact} vs {oracle}");
        }
    }
}

#[test]
fn non_eigenform_has_no_zonal_oracle_but_exact_route_works() {
    let bump = TestForm::by_name("bump").unwrap();
    assert!(zonal_variance_oracle(&bump, 10).is_err());
    let r = exact_variance(&bump, 30, &QuadratureSpec::default()).unwrap();
    assert!(r.value > 0.0 && r.error_estimate < 1e-6 * r.value);
}

#[test]
fn variance_is_rotation_invariant() {
    let tf = TestForm::by_name("quadrupole").unwrap();
    let r = zerovar::Su2::new(
        num_complex::Complex64::new(0.6, 0.48),
        num_complex::Complex64::new(0.0, 0.64),
    )
    .unwrap();
    let spec = QuadratureSpec::default();
    let a = exact_variance(&tf, 25, &spec).unwrap().value;
    let b = exact_variance(&tf.rotated(&r), 25, &spec).unwrap().value;
    assert!((a / b - 1.0).abs() < 1e-6, "{a} vs {b}");
}

#[test]
fn constant_form_has_zero_variance() {
    let c = TestForm::by_name("const").unwrap();
    let ints = coefficient_integrals(&c).unwrap();
    let coeffs = asymptotic_coefficients(1, &ints).unwrap();
    assert_eq!(coeffs.a0, 0.0);
    assert!(exact_variance(&c, 10, &QuadratureSpec::default()).unwrap().value.abs() < 1e-14);
}
