//! Variance of the linear statistic `(Z_{s_k}, ψ)`.
//!
//! * [`exact_variance`]: `∬ Q_k(z,w) f(z) f(w) Ω(z) Ω(w)` by nested quadrature;
//! * [`zonal_variance_oracle`]: the same number by a 1-D Funk–Hecke reduction
//!   for pure spherical harmonics;
//! * [`asymptotic_coefficients`]: `A0`, `A1` of `Var = A0/k + A1/k² + …`;
//! * support for the expansion proof: Wick moments, the series-exchange
//!   residual and the multinomial identity.

mod coefficients;
mod gint;
mod multinomial;
mod wick;

pub use coefficients::{
    asymptotic_coefficients, asymptotic_variance, coefficient_integrals, fit_expansion, AsymptoticCoefficients,
    CoefficientIntegrals, ExpansionFit,
};
pub use gint::{
    gaussian_mass,
    gint_identity_residual, gint_ladder, gint_series_rhs, GintLadder, GintReport, GintSeries, Monomial, PolynomialCm,
};
pub use multinomial::{multinomial_expand, multinomial_expand_exact, polynomial_power_coefficient};
pub use wick::{curvature_contraction, gaussian_moment_mc, moment_catalogue, permanent, wick_moment, MomentEstimate};

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ProjectivePoint, SphereQuadrature, TestForm};
use crate::kernels::normalized_kernel_at_distance;
use crate::quadrature::{composite, geometric_breakpoints, legendre, GaussLegendre, KahanSum};
use crate::specfun::g_in_domain;

/// Node counts and window for [`exact_variance`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    /// Radial Gauss–Legendre nodes per chart for the outer `z` integral; the
    /// angular trapezoid rule uses twice as many.
    pub outer_nodes: usize,
    /// Gauss–Legendre order on each radial panel of the inner `w` integral.
    pub inner_radial: usize,
    /// Trapezoid nodes on each circle around `z`.
    pub inner_angular: usize,
    /// Near-diagonal window `dist(z,w) ≤ b √(log k / k)`.
    pub cutoff_b: f64,
    /// Relative tolerance for the half-resolution self-check.
    pub rel_tol: f64,
}

/// `b² ≥ m + 3` with `m = 1` keeps the truncated far field at `O(k^{-3})`.
pub const MIN_CUTOFF_B2: f64 = 4.0;

/// Geometric refinement levels of the innermost radial panel, where `Q_k`
/// has a `d² log d` singularity.
const NEAR_LEVELS: u32 = 12;

/// Panels across the far field `[b√(log k/k), π/2]`.
const FAR_PANELS: usize = 4;

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            outer_nodes: 32,
            inner_radial: 16,
            inner_angular: 32,
            cutoff_b: 2.0,
            rel_tol: 1e-7,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.outer_nodes < 2 || self.inner_radial < 2 || self.inner_angular < 2 {
            return Err(Error::Config(format!(
                "quadrature node counts must be at least 2 (outer {}, inner radial {}, inner angular {})",
                self.outer_nodes, self.inner_radial, self.inner_angular
            )));
        }
        if !(self.cutoff_b * self.cutoff_b >= MIN_CUTOFF_B2) || !self.cutoff_b.is_finite() {
            return Err(Error::Config(format!(
                "cutoff_b = {} violates b² ≥ {MIN_CUTOFF_B2}",
                self.cutoff_b
            )));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::Config(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        Ok(())
    }

    /// Every node count halved (at least 2); the self-check compares against it.
    pub fn halved(&self) -> Self {
        QuadratureSpec {
            outer_nodes: (self.outer_nodes / 2).max(2),
            inner_radial: (self.inner_radial / 2).max(2),
            inner_angular: (self.inner_angular / 2).max(2),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Mc,
    Exact,
    Asymptotic,
}

/// Parameters that reproduce a [`VarianceResult`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RouteParams {
    Quadrature(QuadratureSpec),
    Sampling { seed: u64, n_samples: usize },
    Coefficients { a0: f64, a1: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceResult {
    pub value: f64,
    pub route: Route,
    pub k: u32,
    pub testform: String,
    pub error_estimate: f64,
    pub params: RouteParams,
    /// Set when a truncated asymptotic value came out negative.
    pub flagged_negative: bool,
    /// Certified bound on `∬_{far} Q_k |f||f|` for the exact route; the far
    /// field is still integrated, the bound documents its size.
    pub far_field_bound: Option<f64>,
}

/// Radius of the near-diagonal ball. For tiny `k` the window would collapse
/// (`log 1 = 0`), so `log k` is floored at 1; the cap at `π/2` then makes the
/// whole sphere "near".
fn near_radius(k: u32, b: f64) -> f64 {
    let kf = k as f64;
    (b * (kf.ln().max(1.0) / kf).sqrt()).min(FRAC_PI_2)
}

/// Radial rule in the geodesic distance `d ∈ [0, π/2]` about the outer point:
/// geometrically graded near `0`, uniform panels on the far field.
fn inner_radial_rule(k: u32, spec: &QuadratureSpec) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(spec.inner_radial);
    let d_near = near_radius(k, spec.cutoff_b);
    let mut nodes = composite(&rule, &geometric_breakpoints(d_near, NEAR_LEVELS));
    if d_near < FRAC_PI_2 {
        let step = (FRAC_PI_2 - d_near) / FAR_PANELS as f64;
        let far: Vec<f64> = (0..=FAR_PANELS).map(|i| d_near + step * i as f64).collect();
        nodes.extend(composite(&rule, &far));
    }
    nodes
}

/// `∫ Q_k(z,w) f(w) Ω(w)` is evaluated in geodesic polar coordinates about
/// `z`, where `Ω = ½ sin(2d) dd dβ` and `Q_k` depends on `d` only.
struct InnerRule {
    cos_sin: Vec<(f64, f64)>,
    weights: Vec<f64>,
    phases: Vec<Complex64>,
}

impl InnerRule {
    fn new(k: u32, spec: &QuadratureSpec) -> Self {
        let dbeta = 2.0 * PI / spec.inner_angular as f64;
        let mut cos_sin = Vec::new();
        let mut weights = Vec::new();
        for (d, w) in inner_radial_rule(k, spec) {
            let q = g_in_domain(normalized_kernel_at_distance(d, k).powi(2));
            cos_sin.push((d.cos(), d.sin()));
            weights.push(w * q * 0.5 * (2.0 * d).sin() * dbeta);
        }
        let phases = (0..spec.inner_angular)
            .map(|j| Complex64::from_polar(1.0, dbeta * j as f64))
            .collect();
        InnerRule { cos_sin, weights, phases }
    }

    fn apply(&self, tf: &TestForm, z: &ProjectivePoint) -> f64 {
        let perp = z.antipode();
        let mut acc = KahanSum::default();
        for (&(c, s), &w) in self.cos_sin.iter().zip(&self.weights) {
            if w == 0.0 {
                continue;
            }
            let ring: f64 = self
                .phases
                .iter()
                .map(|&e| {
                    let t = e * s;
                    let p = ProjectivePoint::from_unit(z.h0() * c + perp.h0() * t, z.h1() * c + perp.h1() * t);
                    tf.f(&p)
                })
                .sum();
            acc.add(w * ring);
        }
        acc.value()
    }
}

fn bipotential_integral(tf: &TestForm, k: u32, spec: &QuadratureSpec) -> f64 {
    let outer = SphereQuadrature::new(spec.outer_nodes, 2 * spec.outer_nodes);
    let inner = InnerRule::new(k, spec);
    // Indexed map then a sequential compensated sum: the result does not
    // depend on how rayon schedules the outer nodes.
    let terms: Vec<f64> = outer
        .points
        .par_iter()
        .zip(outer.weights.par_iter())
        .map(|(z, &wz)| {
            let fz = tf.f(z);
            if fz == 0.0 {
                0.0
            } else {
                wz * fz * inner.apply(tf, z)
            }
        })
        .collect();
    terms.into_iter().collect::<KahanSum>().value()
}

/// `Var(Z_{s_k}, ψ) = ∬ Q_k(z,w) f(z) f(w) Ω(z) Ω(w)`.
///
/// Outer: tensor rule over both chart disks. Inner: geodesic polar
/// coordinates about each outer node, graded radially into the diagonal, where
/// `Q_k` has a logarithmic derivative singularity, and integrated on the far
/// field with a coarse uniform rule. The error estimate is the difference from
/// the same computation with every node count halved.
pub fn exact_variance(tf: &TestForm, k: u32, spec: &QuadratureSpec) -> Result<VarianceResult> {
    if k < 1 {
        return Err(Error::domain("exact_variance", "degree k must be at least 1"));
    }
    spec.validate()?;
    let value = bipotential_integral(tf, k, spec);
    let coarse = bipotential_integral(tf, k, &spec.halved());
    let error_estimate = (value - coarse).abs();
    if error_estimate > 10.0 * spec.rel_tol * value.abs().max(f64::MIN_POSITIVE) && error_estimate > 1e-15 {
        return Err(Error::numerical(
            "exact_variance",
            format!(
                "quadrature not converged for '{}' at k = {k}: full {value:e}, half {coarse:e}, \
                 difference {error_estimate:e} exceeds 10 × rel_tol {:e}",
                tf.name(),
                spec.rel_tol
            ),
        ));
    }
    let d_near = near_radius(k, spec.cutoff_b);
    let abs_f = SphereQuadrature::new(spec.outer_nodes, 2 * spec.outer_nodes).integrate(|p| tf.f(p).abs());
    let far_field_bound = g_in_domain(normalized_kernel_at_distance(d_near, k).powi(2)) * abs_f * abs_f;
    Ok(VarianceResult {
        value,
        route: Route::Exact,
        k,
        testform: tf.name().to_string(),
        error_estimate,
        params: RouteParams::Quadrature(*spec),
        flagged_negative: false,
        far_field_bound: Some(far_field_bound),
    })
}

/// Funk–Hecke reduction: for `f` in the degree-`l` harmonic space,
/// `∫ Q_k(z,w) f(w) Ω(w) = (π/2) K_l f(z)` with
/// `K_l = ∫_{-1}^{1} G(((1+t)/2)^k) P_l(t) dt`
/// (`t` is the cosine of the angle on the unit sphere, `cos² d = (1+t)/2`, and
/// `Ω` is a quarter of the unit-sphere area). Hence
/// `Var = (π/2) K_l ∫ f² Ω`.
pub fn zonal_variance_oracle(tf: &TestForm, k: u32) -> Result<f64> {
    let l = tf.harmonic_degree().ok_or_else(|| {
        Error::unsupported(
            "zonal_variance_oracle",
            format!("'{}' is not a pure spherical harmonic", tf.name()),
        )
    })?;
    if k < 1 {
        return Err(Error::domain("zonal_variance_oracle", "degree k must be at least 1"));
    }
    let i_ff = SphereQuadrature::default().integrate(|p| tf.f(p).powi(2));
    if i_ff == 0.0 {
        return Ok(0.0);
    }
    Ok(0.5 * PI * zonal_coefficient(l, k) * i_ff)
}

/// `K_l = ∫_{-1}^{1} G(((1+t)/2)^k) P_l(t) dt`, integrated in `τ = 1 - t`
/// with panels graded geometrically into `τ = 0`.
pub fn zonal_coefficient(l: usize, k: u32) -> f64 {
    let rule = GaussLegendre::new(24);
    composite(&rule, &geometric_breakpoints(2.0, 60))
        .into_iter()
        .map(|(tau, w)| {
            let arg = (k as f64 * (-0.5 * tau).ln_1p()).exp();
            w * g_in_domain(arg) * legendre(l, 1.0 - tau)
        })
        .collect::<KahanSum>()
        .value()
}

/// Direct 4-D tensor-grid evaluation of the bipotential integral: every pair
/// of nodes of a coarse sphere rule. Only meant as an oracle at small `k`.
pub fn brute_force_variance(tf: &TestForm, k: u32, radial: usize) -> f64 {
    let quad = SphereQuadrature::new(radial, 2 * radial);
    let fw: Vec<f64> = quad.points.iter().zip(&quad.weights).map(|(p, w)| tf.f(p) * w).collect();
    let terms: Vec<f64> = quad
        .points
        .par_iter()
        .zip(fw.par_iter())
        .map(|(z, &fz)| {
            quad.points
                .iter()
                .zip(&fw)
                .map(|(w, &fv)| crate::kernels::q_kernel(z, w, k) * fv)
                .sum::<f64>()
                * fz
        })
        .collect();
    terms.into_iter().collect::<KahanSum>().value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{testform_library, Su2};
    use crate::specfun::riemann_zeta;

    fn psi1() -> TestForm {
        TestForm::by_name("psi1").unwrap()
    }

    /// k·Var for degree 1 has the closed form (4/3)·k·Σ_n k/(n(nk+1)(nk+2)):
    /// P_1 against G's power series, term by term.
    fn psi1_series(k: u32) -> f64 {
        let kf = k as f64;
        let mut acc = KahanSum::default();
        for n in (1..=2_000_000u64).rev() {
            let nf = n as f64;
            acc.add(kf / (nf * (nf * kf + 1.0) * (nf * kf + 2.0)));
        }
        // tail Σ_{n>N} ≈ 1/(2 k N²)
        acc.add(1.0 / (2.0 * kf * 4e12));
        4.0 / 3.0 * kf * acc.value()
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::default().validate().is_ok());
        let bad = QuadratureSpec {
            cutoff_b: 1.9,
            ..QuadratureSpec::default()
        };
        assert!(bad.validate().is_err());
        let bad = QuadratureSpec {
            outer_nodes: 1,
            ..QuadratureSpec::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn zonal_oracle_matches_series_for_psi1() {
        for k in [1, 2, 20, 100] {
            let zonal = zonal_variance_oracle(&psi1(), k).unwrap() * k as f64;
            let series = psi1_series(k);
            assert!((zonal / series - 1.0).abs() < 1e-10, "k={k}: {zonal} vs {series}");
        }
        // one uniform root: Var(height) = 1/3
        assert!((zonal_variance_oracle(&psi1(), 1).unwrap() - 1.0 / 3.0).abs() < 1e-10);
        // frozen value at k = 100
        let v = zonal_variance_oracle(&psi1(), 100).unwrap() * 100.0;
        assert!((v - 1.560_397).abs() < 5e-7, "{v}");
    }

    #[test]
    fn zonal_oracle_rejects_non_eigenforms() {
        let bump = TestForm::by_name("bump").unwrap();
        assert!(matches!(zonal_variance_oracle(&bump, 10), Err(Error::Unsupported { .. })));
        assert_eq!(zonal_variance_oracle(&TestForm::by_name("const").unwrap(), 10).unwrap(), 0.0);
    }

    #[test]
    fn exact_matches_zonal_oracle() {
        for tf in testform_library().into_iter().filter(|t| t.eigenvalue().is_some()) {
            for k in [3, 20] {
                let exact = exact_variance(&tf, k, &QuadratureSpec::default()).unwrap();
                let oracle = zonal_variance_oracle(&tf, k).unwrap();
                if oracle == 0.0 {
                    assert_eq!(exact.value, 0.0);
                } else {
                    assert!((exact.value / oracle - 1.0).abs() < 1e-6, "{} k={k}", tf.name());
                }
            }
        }
    }

    #[test]
    fn exact_is_rotation_invariant_and_positive() {
        let rot = Su2::new(Complex64::new(0.3, 0.8), Complex64::new(-0.4, 0.2)).unwrap();
        let spec = QuadratureSpec::default();
        for name in ["psi1", "bump"] {
            let tf = TestForm::by_name(name).unwrap();
            let a = exact_variance(&tf, 10, &spec).unwrap();
            let b = exact_variance(&tf.rotated(&rot), 10, &spec).unwrap();
            assert!(a.value > 0.0);
            assert!((a.value - b.value).abs() < 1e-8 * a.value.max(1.0), "{name}");
            assert!(a.far_field_bound.unwrap() >= 0.0);
        }
    }

    #[test]
    fn brute_force_grid_at_k1() {
        let bf = brute_force_variance(&psi1(), 1, 24);
        assert!((bf / (1.0 / 3.0) - 1.0).abs() < 1e-3, "{bf}");
    }

    #[test]
    fn asymptotic_chain_for_psi1() {
        let ints = coefficient_integrals(&psi1()).unwrap();
        let c = asymptotic_coefficients(1, &ints).unwrap();
        let z3 = riemann_zeta(3.0).unwrap();
        assert!((c.a0 - 4.0 * z3 / 3.0).abs() < 1e-9);
        assert!((c.a1 + 2.0 * PI.powi(4) / 45.0).abs() < 1e-8);
        // two-term prediction agrees with the oracle to O(1/k²)
        let v = zonal_variance_oracle(&psi1(), 400).unwrap() * 400.0;
        assert!((v - c.a0 - c.a1 / 400.0).abs() < 2e-4);
    }
}
