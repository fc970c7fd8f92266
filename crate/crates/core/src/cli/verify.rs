//! Built-in verification suites: fast invariant and closed-form checks per
//! module, reported as ordinary [`Check`]s.

use std::f64::consts::PI;

use crate::error::Result;
use crate::geometry::{scalar_curvature, CurvatureData, ProjectivePoint, SphereQuadrature, TestForm};
use crate::kernels::{decay_ladder, normalized_kernel, q_kernel, szego_magnitude, szego_magnitude_basis, SectionNorms};
use crate::montecarlo::mc_variance;
use crate::specfun::{dilog, g_function, riemann_zeta, SeriesTolerance, ZETA_2};
use crate::variance::{
    asymptotic_coefficients, coefficient_integrals, curvature_contraction, exact_variance, multinomial_expand_exact,
    wick_moment, zonal_variance_oracle, QuadratureSpec,
};

use super::report::Check;
use super::{psi1_coefficients, Suite};

pub(crate) fn run_suite(suite: Suite, checks: &mut Vec<Check>) -> Result<()> {
    match suite {
        Suite::Specfun => specfun(checks),
        Suite::Geometry => geometry(checks),
        Suite::Kernels => kernels(checks),
        Suite::Variance => variance(checks),
        Suite::Montecarlo => montecarlo(checks),
        Suite::All => {
            specfun(checks)?;
            geometry(checks)?;
            kernels(checks)?;
            variance(checks)?;
            montecarlo(checks)
        }
    }
}

fn specfun(checks: &mut Vec<Check>) -> Result<()> {
    let tol = SeriesTolerance::default();
    let four_pi_sq = 4.0 * PI * PI;
    checks.push(Check::absolute("zeta(2)", PI * PI / 6.0, riemann_zeta(2.0)?, 1e-14, "closed form"));
    checks.push(Check::absolute("zeta(3)", 1.202_056_903_159_594_2, riemann_zeta(3.0)?, 1e-14, "closed form"));
    checks.push(Check::absolute("zeta(4)", PI.powi(4) / 90.0, riemann_zeta(4.0)?, 1e-14, "closed form"));
    checks.push(Check::absolute("Li2(1)", ZETA_2, dilog(1.0, tol)?, 1e-13, "closed form"));
    checks.push(Check::absolute("G(0)", 0.0, g_function(0.0, tol)?, 1e-15, "closed form"));
    checks.push(Check::absolute("G(1)", ZETA_2 / four_pi_sq, g_function(1.0, tol)?, 1e-13, "closed form"));
    checks.push(Check::absolute("G(-1)", -ZETA_2 / 2.0 / four_pi_sq, g_function(-1.0, tol)?, 1e-13, "closed form"));
    let half = (PI * PI / 12.0 - 0.5 * 2f64.ln().powi(2)) / four_pi_sq;
    checks.push(Check::absolute("G(1/2)", half, g_function(0.5, tol)?, 1e-13, "closed form"));
    let mut monotone = true;
    let mut prev = g_function(-1.0, tol)?;
    for i in 1..=200 {
        let g = g_function(-1.0 + i as f64 / 100.0, tol)?;
        monotone &= g > prev;
        prev = g;
    }
    checks.push(Check::holds("G increasing on [-1, 1]", monotone, "closed form"));
    Ok(())
}

fn geometry(checks: &mut Vec<Check>) -> Result<()> {
    let quad = SphereQuadrature::default();
    checks.push(Check::relative("sphere area", PI, quad.integrate(|_| 1.0), 1e-12, "closed form"));
    let psi1 = TestForm::by_name("psi1")?;
    checks.push(Check::relative("∫ψ₁² Ω", PI / 3.0, quad.integrate(|p| psi1.psi(p).powi(2)), 1e-10, "closed form"));
    for tf in crate::geometry::testform_library() {
        let mean = quad.integrate(|p| tf.f(p));
        checks.push(Check::absolute(format!("∫f Ω = 0 ({})", tf.name()), 0.0, mean, 1e-9, "closed form"));
    }
    let p = ProjectivePoint::from_affine(num_complex::Complex64::new(0.3, -0.7));
    checks.push(Check::absolute("scalar curvature", 2.0, scalar_curvature(&p), 0.0, "closed form"));
    checks.push(Check::holds(
        "curvature tensor has Kähler symmetries",
        CurvatureData::complex_projective(2).has_kahler_symmetries(1e-14),
        "closed form",
    ));
    Ok(())
}

fn kernels(checks: &mut Vec<Check>) -> Result<()> {
    let p = ProjectivePoint::from_affine(num_complex::Complex64::new(0.4, 0.2));
    for k in [1u32, 10, 300] {
        let norms = SectionNorms::closed_form(k)?;
        let mut gap: f64 = 0.0;
        for d in [0.0, 0.1, 0.6, 1.2] {
            let q = p.geodesic_offset(d, 1.3);
            let a = szego_magnitude(&p, &q, k)?.log_magnitude;
            let b = szego_magnitude_basis(&p, &q, &norms)?.log_magnitude;
            gap = gap.max((a - b).abs() / (1.0 + a.abs()));
        }
        checks.push(Check::absolute(format!("kernel routes agree (k={k})"), 0.0, gap, 1e-10, "closed form"));
        checks.push(Check::absolute(format!("P_k(p,p) (k={k})"), 1.0, normalized_kernel(&p, &p, k), 1e-12, "closed form"));
    }
    let q = ProjectivePoint::origin().geodesic_offset(0.1, 0.0);
    checks.push(Check::absolute(
        "Q_100 at distance 0.1",
        0.010_334_471_862_894_04,
        q_kernel(&ProjectivePoint::origin(), &q, 100),
        1e-12,
        "closed form",
    ));
    let ladder = decay_ladder(&[100, 200, 400, 800], 1.0)?;
    checks.push(Check::holds("decay ratio bounded in k (p=1)", ladder.pass, "asymptotic theory"));
    Ok(())
}

fn variance(checks: &mut Vec<Check>) -> Result<()> {
    let psi1 = TestForm::by_name("psi1")?;
    let k = 20;
    let exact = exact_variance(&psi1, k, &QuadratureSpec::default())?;
    let oracle = zonal_variance_oracle(&psi1, k)?;
    checks.push(Check::relative("exact vs zonal series (k=20)", oracle, exact.value, 1e-6, "independent oracle"));
    let coeffs = asymptotic_coefficients(1, &coefficient_integrals(&psi1)?)?;
    let (a0, a1) = psi1_coefficients()?;
    checks.push(Check::relative("A0(ψ₁)", a0, coeffs.a0, 1e-8, "closed form"));
    checks.push(Check::relative("A1(ψ₁)", a1, coeffs.a1, 1e-8, "closed form"));
    checks.push(Check::absolute("E|v|⁴ = 2", 2.0, wick_moment(1, &[1, 1], &[1, 1])? as f64, 0.0, "closed form"));
    checks.push(Check::absolute(
        "curvature contraction = 2ρ on CP²",
        12.0,
        curvature_contraction(&CurvatureData::complex_projective(2))?,
        1e-12,
        "closed form",
    ));
    // coefficient of x^7 in (1 + 3x² - 2x³)^5
    let direct = crate::variance::polynomial_power_coefficient(&[3, -2], 5, 7);
    checks.push(Check::absolute(
        "multinomial expansion matches polynomial power",
        direct as f64,
        multinomial_expand_exact(&[3, -2], 5, 7)? as f64,
        0.0,
        "closed form",
    ));
    Ok(())
}

fn montecarlo(checks: &mut Vec<Check>) -> Result<()> {
    let psi1 = TestForm::by_name("psi1")?;
    let est = mc_variance(1, &psi1, 20_000, 7)?;
    checks.push(Check::absolute("MC variance at k=1", 1.0 / 3.0, est.variance, 4.0 * est.stderr_variance, "closed form"));
    checks.push(Check::absolute("MC mean at k=1", 0.0, est.mean, 4.0 * est.stderr_mean, "closed form"));
    Ok(())
}
