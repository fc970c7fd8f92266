//! The two-term expansion `Var = A0 k^{-m} + A1 k^{-m-1} + …` and fitting it.
//!
//! With `f = *i∂∂̄ψ`:
//! `A0 = π^{m-2} ζ(m+2)/4 · ∫f²Ω` and
//! `A1 = -π^{m-2} ζ(m+3) · (⅛∫ρf²Ω + ¼‖∂̄f‖²)`.
//! On functions `∂̄*∂̄ = -¼Δ` for the Laplace–Beltrami `Δ` of `ω`, so
//! `‖∂̄f‖² = ⟨∂̄*∂̄f, f⟩ = (λ/4)∫f²Ω` when `Δf = -λf`. In general
//! `‖∂̄f‖² = ¼∫|∇f|²` is a Dirichlet energy, which is conformally invariant
//! and can be computed with flat gradients in either chart.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{scalar_curvature, Chart, ProjectivePoint, SphereQuadrature, TestForm};
use crate::specfun::riemann_zeta;

use super::{Route, RouteParams, VarianceResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientIntegrals {
    /// `∫ f² Ω`.
    pub i_ff: f64,
    /// `∫ ρ f² Ω`.
    pub i_rff: f64,
    /// `‖∂̄f‖² = ⟨∂̄*∂̄f, f⟩`.
    pub i_dbarf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticCoefficients {
    pub a0: f64,
    pub a1: f64,
    pub m: u32,
    pub integrals: CoefficientIntegrals,
}

/// Step for the fourth-order central differences of `f` in a chart.
const FD_STEP: f64 = 1e-3;

/// `|∇_flat f|²` at `p` in whichever chart contains it in the unit disk,
/// multiplied by the conformal factor `(1+|c|²)²` so that integrating against
/// `Ω` gives the flat Dirichlet energy.
fn dirichlet_density(tf: &TestForm, p: &ProjectivePoint) -> f64 {
    let (c, lift): (Complex64, fn(Complex64) -> ProjectivePoint) = match p.chart() {
        Chart::Affine(z) => (z, ProjectivePoint::from_affine),
        Chart::Conjugate(w) => (w, ProjectivePoint::from_conjugate),
    };
    let h = FD_STEP;
    let at = |dz: Complex64| tf.f(&lift(c + dz));
    let diff = |dir: Complex64| {
        (-at(dir * (2.0 * h)) + 8.0 * at(dir * h) - 8.0 * at(-dir * h) + at(-dir * (2.0 * h))) / (12.0 * h)
    };
    let fx = diff(Complex64::new(1.0, 0.0));
    let fy = diff(Complex64::new(0.0, 1.0));
    (fx * fx + fy * fy) * (1.0 + c.norm_sqr()).powi(2)
}

/// `‖∂̄f‖² = ¼ ∫ |∇f|²` by finite-difference gradients, for any test form.
pub fn dbar_energy_by_gradient(tf: &TestForm, quad: &SphereQuadrature) -> f64 {
    0.25 * quad.integrate(|p| dirichlet_density(tf, p))
}

/// The three integrals entering `A0` and `A1`.
pub fn coefficient_integrals(tf: &TestForm) -> Result<CoefficientIntegrals> {
    let quad = SphereQuadrature::default();
    let i_ff = quad.integrate(|p| tf.f(p).powi(2));
    let i_rff = quad.integrate(|p| scalar_curvature(p) * tf.f(p).powi(2));
    let i_dbarf = match tf.eigenvalue() {
        Some(lambda) => 0.25 * lambda * i_ff,
        None => dbar_energy_by_gradient(tf, &quad),
    };
    Ok(CoefficientIntegrals { i_ff, i_rff, i_dbarf })
}

pub fn asymptotic_coefficients(m: u32, integrals: &CoefficientIntegrals) -> Result<AsymptoticCoefficients> {
    if m < 1 {
        return Err(Error::domain("asymptotic_coefficients", "dimension m must be at least 1"));
    }
    let mf = m as f64;
    let scale = PI.powf(mf - 2.0);
    let a0 = scale * riemann_zeta(mf + 2.0)? / 4.0 * integrals.i_ff;
    let a1 = -scale * riemann_zeta(mf + 3.0)? * (integrals.i_rff / 8.0 + integrals.i_dbarf / 4.0);
    Ok(AsymptoticCoefficients {
        a0,
        a1,
        m,
        integrals: *integrals,
    })
}

/// `A0/k + A1/k²` on `CP¹` as a [`VarianceResult`]; flagged when negative.
pub fn asymptotic_variance(tf: &TestForm, k: u32) -> Result<VarianceResult> {
    if k < 1 {
        return Err(Error::domain("asymptotic_variance", "degree k must be at least 1"));
    }
    let c = asymptotic_coefficients(1, &coefficient_integrals(tf)?)?;
    let kf = k as f64;
    let value = c.a0 / kf + c.a1 / (kf * kf);
    Ok(VarianceResult {
        value,
        route: Route::Asymptotic,
        k,
        testform: tf.name().to_string(),
        // size of the first omitted order, k^{-3}, scaled by |A1|
        error_estimate: c.a1.abs() / kf.powi(3),
        params: RouteParams::Coefficients { a0: c.a0, a1: c.a1 },
        flagged_negative: value < 0.0,
        far_field_bound: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionFit {
    pub a0_hat: f64,
    pub a1_hat: f64,
    /// Weighted residual 2-norm `‖k (k·Var − A0 − A1/k)‖`.
    pub residual_norm: f64,
}

/// Weighted least squares of `k·Var` against `[1, 1/k]` with weights `k²`
/// (the first omitted term is `A2 k^{-2}` in `k·Var`).
pub fn fit_expansion(data: &[(f64, f64)]) -> Result<ExpansionFit> {
    let mut ks: Vec<f64> = data.iter().map(|&(k, _)| k).collect();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    if ks.len() < 2 {
        return Err(Error::domain(
            "fit_expansion",
            format!("need at least 2 distinct k, got {}", ks.len()),
        ));
    }
    if data.iter().any(|&(k, v)| !(k > 0.0) || !v.is_finite()) {
        return Err(Error::domain("fit_expansion", "k must be positive and variances finite"));
    }
    let n = data.len();
    // row scaled by √weight = k
    let design = nalgebra::DMatrix::from_fn(n, 2, |i, j| {
        let k = data[i].0;
        if j == 0 {
            k
        } else {
            1.0
        }
    });
    let rhs = nalgebra::DVector::from_iterator(n, data.iter().map(|&(k, v)| k * k * v));
    let sol = design
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::numerical("fit_expansion", e.to_string()))?;
    let residual_norm = (design * &sol - rhs).norm();
    Ok(ExpansionFit {
        a0_hat: sol[0],
        a1_hat: sol[1],
        residual_norm,
    })
}
