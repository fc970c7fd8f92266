//! Exchanging the `G` series with a perturbed Gaussian integral:
//!
//! `∫ G(e^{-|u|²}[1 + α(u)/k]) F(u) dν = (1/4π²) Σ_n n^{-2} ∫ e^{-n|u|²}[1 + nα(u)/k] F(u) dν + O(k^{-3/2})`
//!
//! for polynomials `α` without constant or linear part and `F` of polynomial
//! growth, `dν` Lebesgue measure on `C^m`. Summing the right side under the
//! integral gives `∫ F [G(t) + a·(−log(1−t))/4π²]` with `t = e^{-|u|²}`,
//! `a = α/k`, so the residual is the integral of the pointwise second-order
//! Taylor remainder of `G`, which is evaluated directly without cancellation
//! between the two sides.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{composite, geometric_breakpoints, GaussLegendre, KahanSum};
use crate::specfun::{g_function, SeriesTolerance, FOUR_PI_SQ};

/// `coeff · Π_j u_j^{a_j} ū_j^{b_j}` with `powers[j] = (a_j, b_j)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Monomial {
    pub coeff: Complex64,
    pub powers: Vec<(u32, u32)>,
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.powers.iter().map(|&(a, b)| a + b).sum()
    }
}

/// A real-valued polynomial in `(u, ū)` on `C^m`: the real part of a sum of
/// monomials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolynomialCm {
    pub m: usize,
    pub terms: Vec<Monomial>,
}

impl PolynomialCm {
    pub fn new(m: usize, terms: Vec<Monomial>) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("PolynomialCm::new", "dimension must be at least 1"));
        }
        if let Some(t) = terms.iter().find(|t| t.powers.len() != m) {
            return Err(Error::domain(
                "PolynomialCm::new",
                format!("monomial has {} exponent pairs, expected {m}", t.powers.len()),
            ));
        }
        Ok(PolynomialCm { m, terms })
    }

    pub fn constant(m: usize, c: f64) -> Self {
        PolynomialCm {
            m,
            terms: vec![Monomial {
                coeff: Complex64::new(c, 0.0),
                powers: vec![(0, 0); m],
            }],
        }
    }

    /// `coeff · |u|^{2s} = coeff · (Σ_j |u_j|²)^s`, expanded.
    pub fn norm_power(m: usize, s: u32, coeff: f64) -> Self {
        fn compositions(m: usize, s: u32) -> Vec<Vec<u32>> {
            if m == 1 {
                return vec![vec![s]];
            }
            (0..=s)
                .flat_map(|first| {
                    compositions(m - 1, s - first).into_iter().map(move |mut rest| {
                        rest.insert(0, first);
                        rest
                    })
                })
                .collect()
        }
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        let terms = compositions(m, s)
            .into_iter()
            .map(|parts| {
                let multinom = fact(s) / parts.iter().map(|&p| fact(p)).product::<f64>();
                Monomial {
                    coeff: Complex64::new(coeff * multinom, 0.0),
                    powers: parts.into_iter().map(|p| (p, p)).collect(),
                }
            })
            .collect();
        PolynomialCm { m, terms }
    }

    pub fn eval(&self, u: &[Complex64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.powers
                    .iter()
                    .zip(u)
                    .fold(t.coeff, |acc, (&(a, b), x)| acc * x.powu(a) * x.conj().powu(b))
                    .re
            })
            .sum()
    }

    pub fn min_degree(&self) -> u32 {
        self.terms
            .iter()
            .filter(|t| t.coeff != Complex64::new(0.0, 0.0))
            .map(Monomial::degree)
            .min()
            .unwrap_or(u32::MAX)
    }

    /// `Σ |c| r^{deg}`, a bound for `|P(u)|` on `|u| = r`.
    pub fn abs_bound(&self, r: f64) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm() * r.powi(t.degree() as i32)).sum()
    }
}

/// Product-polar rule for `∫_{C^m} h(u) dν(u)` on `|u_j| ≤ R` for
/// integrands with Gaussian decay, graded into the origin where `log(1-t)`
/// is singular.
struct CmRule {
    m: usize,
    points: Vec<(Vec<Complex64>, f64, f64)>,
}

/// Radial cut-off: `e^{-R²}` is far below double precision relative to O(1).
const RADIUS: f64 = 7.0;

impl CmRule {
    fn new(m: usize) -> Result<Self> {
        let (gl, levels, panels, angular) = match m {
            1 => (20, 24, 12, 32),
            2 => (10, 6, 6, 12),
            _ => {
                return Err(Error::unsupported(
                    "gint_identity_residual",
                    format!("quadrature over C^{m} is implemented for m ∈ {{1, 2}}"),
                ))
            }
        };
        let rule = GaussLegendre::new(gl);
        let mut bps = geometric_breakpoints(1.0, levels);
        let step = (RADIUS - 1.0) / panels as f64;
        bps.extend((1..=panels).map(|i| 1.0 + step * i as f64));
        let radial = composite(&rule, &bps);
        let dtheta = TAU / angular as f64;
        let disk: Vec<(Complex64, f64)> = radial
            .iter()
            .flat_map(|&(r, w)| {
                (0..angular).map(move |j| (Complex64::from_polar(r, dtheta * j as f64), w * r * dtheta))
            })
            .collect();
        let points = if m == 1 {
            disk.iter().map(|&(u, w)| (vec![u], w, u.norm_sqr())).collect()
        } else {
            disk.iter()
                .flat_map(|&(u1, w1)| {
                    disk.iter()
                        .map(move |&(u2, w2)| (vec![u1, u2], w1 * w2, u1.norm_sqr() + u2.norm_sqr()))
                })
                .collect()
        };
        Ok(CmRule { m, points })
    }
}

/// `G` evaluated well below the size of the Taylor remainders being integrated.
fn g_precise(t: f64) -> f64 {
    let tol = SeriesTolerance::new(1e-20, 100_000).expect("valid tolerance");
    g_function(t, tol).expect("argument kept inside [-1, 1] by the precondition")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GintReport {
    pub k: u32,
    pub m: usize,
    /// `∫ G(t(1+a)) F dν`.
    pub lhs: f64,
    /// The `n`-series summed under the integral: `∫ F [G(t) + a·(-log(1-t))/4π²] dν`.
    pub rhs: f64,
    /// `|∫ F [G(t(1+a)) - G(t) - a·(-log(1-t))/4π²] dν|`.
    pub residual: f64,
}

fn check_inputs(alpha: &PolynomialCm, f: &PolynomialCm, k: u32, m: usize) -> Result<()> {
    if alpha.m != m || f.m != m {
        return Err(Error::domain("gint_identity_residual", "α and F must live on C^m"));
    }
    if k < 1 {
        return Err(Error::domain("gint_identity_residual", "k must be at least 1"));
    }
    if alpha.min_degree() < 2 {
        return Err(Error::domain(
            "gint_identity_residual",
            "α must have no constant or linear part",
        ));
    }
    Ok(())
}

/// `1 + |α(u)|/k ≤ e^{|u|²/2}` at every quadrature node and, through the
/// coefficient bound, on radii up to 30 beyond the integration box.
fn check_precondition(alpha: &PolynomialCm, k: u32, rule: &CmRule) -> Result<()> {
    let kf = k as f64;
    for (u, _, r2) in &rule.points {
        let lhs = 1.0 + alpha.eval(u).abs() / kf;
        if lhs > (0.5 * r2).exp() {
            return Err(Error::domain(
                "gint_identity_residual",
                format!("precondition 1 + |α(u)|/k ≤ e^{{|u|²/2}} fails at |u|² = {r2} for k = {k}"),
            ));
        }
    }
    let mut r = RADIUS;
    while r <= 30.0 {
        if 1.0 + alpha.abs_bound(r) / kf > (0.5 * r * r).exp() {
            return Err(Error::domain(
                "gint_identity_residual",
                format!("precondition fails beyond the integration box at |u| = {r} for k = {k}"),
            ));
        }
        r += 0.25;
    }
    Ok(())
}

/// Residual of the series exchange for the given `α`, `F`, `k`, `m ∈ {1, 2}`.
pub fn gint_identity_residual(alpha: &PolynomialCm, f: &PolynomialCm, k: u32, m: usize) -> Result<GintReport> {
    check_inputs(alpha, f, k, m)?;
    let rule = CmRule::new(m)?;
    check_precondition(alpha, k, &rule)?;
    let kf = k as f64;
    let mut lhs = KahanSum::default();
    let mut rhs = KahanSum::default();
    let mut rem = KahanSum::default();
    for (u, w, r2) in &rule.points {
        let fu = f.eval(u);
        if fu == 0.0 {
            continue;
        }
        let t = (-r2).exp();
        let a = alpha.eval(u) / kf;
        let g_pert = g_precise((t * (1.0 + a)).min(1.0));
        let g_base = g_precise(t);
        // -log(1-t) with 1-t = -expm1(-|u|²), exact even where t rounds to 1
        let linear = if a == 0.0 { 0.0 } else { -a * (-(-r2).exp_m1()).ln() / FOUR_PI_SQ };
        lhs.add(w * fu * g_pert);
        rhs.add(w * fu * (g_base + linear));
        rem.add(w * fu * ((g_pert - g_base) - linear));
    }
    Ok(GintReport {
        k,
        m: rule.m,
        lhs: lhs.value(),
        rhs: rhs.value(),
        residual: rem.value().abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GintSeries {
    pub n_terms: usize,
    pub partial_sum: f64,
    /// Bound on `|Σ_{n > N}|`.
    pub tail_bound: f64,
}

/// The right-hand side as the literal truncated `n`-series, with a certified
/// tail: after `v = √n u`, `|term_n| ≤ (A + B/k)/(4π² n^{2+m})` where
/// `A = ∫e^{-|v|²}F̂(|v|)`, `B = ∫e^{-|v|²}α̂(|v|)F̂(|v|)` use the coefficient
/// bounds `F̂`, `α̂`.
pub fn gint_series_rhs(alpha: &PolynomialCm, f: &PolynomialCm, k: u32, m: usize, n_terms: usize) -> Result<GintSeries> {
    check_inputs(alpha, f, k, m)?;
    if n_terms < 1 {
        return Err(Error::domain("gint_series_rhs", "need at least one term"));
    }
    let rule = CmRule::new(m)?;
    let kf = k as f64;
    let mut partial = KahanSum::default();
    for n in 1..=n_terms {
        let nf = n as f64;
        let scale = nf.sqrt().recip();
        let integral: f64 = rule
            .points
            .iter()
            .map(|(v, w, r2)| {
                let u: Vec<Complex64> = v.iter().map(|x| x * scale).collect();
                w * (-r2).exp() * (1.0 + nf * alpha.eval(&u) / kf) * f.eval(&u)
            })
            .sum::<f64>()
            / nf.powi(m as i32);
        partial.add(integral / (FOUR_PI_SQ * nf * nf));
    }
    let (a, b) = rule.points.iter().fold((0.0, 0.0), |(a, b), (_, w, r2)| {
        let r = r2.sqrt();
        let gauss = w * (-r2).exp();
        (a + gauss * f.abs_bound(r), b + gauss * alpha.abs_bound(r) * f.abs_bound(r))
    });
    let mf = m as f64;
    let tail_bound = (a + b / kf) / (FOUR_PI_SQ * (1.0 + mf) * (n_terms as f64).powf(1.0 + mf));
    Ok(GintSeries {
        n_terms,
        partial_sum: partial.value(),
        tail_bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GintLadder {
    pub reports: Vec<GintReport>,
    /// `k^{3/2} · residual(k)`.
    pub scaled: Vec<f64>,
    /// `scaled` is nonincreasing within 10%.
    pub pass: bool,
}

/// The residual over increasing `ks`, checking `k^{3/2}·residual` stays bounded.
pub fn gint_ladder(alpha: &PolynomialCm, f: &PolynomialCm, ks: &[u32], m: usize) -> Result<GintLadder> {
    let reports = ks
        .iter()
        .map(|&k| gint_identity_residual(alpha, f, k, m))
        .collect::<Result<Vec<_>>>()?;
    let scaled: Vec<f64> = reports.iter().map(|r| (r.k as f64).powf(1.5) * r.residual).collect();
    let pass = scaled.windows(2).all(|w| w[1] <= 1.1 * w[0]);
    Ok(GintLadder { reports, scaled, pass })
}

/// `∫_{C} e^{-n|u|²} dν = π/n`; used by tests and reports.
pub fn gaussian_mass(n: f64) -> f64 {
    PI / n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::riemann_zeta;

    fn quartic(m: usize) -> PolynomialCm {
        PolynomialCm::norm_power(m, 2, 0.5)
    }

    #[test]
    fn zero_perturbation_is_exact() {
        let alpha = PolynomialCm::new(1, vec![]).unwrap();
        let one = PolynomialCm::constant(1, 1.0);
        let r = gint_identity_residual(&alpha, &one, 100, 1).unwrap();
        assert_eq!(r.residual, 0.0);
        // both sides equal ζ(3)/(4π)
        let want = riemann_zeta(3.0).unwrap() / (4.0 * PI);
        assert!((r.lhs - want).abs() < 1e-12, "{}", r.lhs);
        assert!((gaussian_mass(2.0) - PI / 2.0).abs() < 1e-16);
    }

    #[test]
    fn residual_pins_for_quartic_alpha() {
        // independent high-precision values of the pointwise-remainder integral
        let one = PolynomialCm::constant(1, 1.0);
        let r100 = gint_identity_residual(&quartic(1), &one, 100, 1).unwrap().residual;
        let r400 = gint_identity_residual(&quartic(1), &one, 400, 1).unwrap().residual;
        assert!((r100 / 4.681e-7 - 1.0).abs() < 2e-3, "{r100}");
        assert!((r400 / 2.923e-8 - 1.0).abs() < 2e-3, "{r400}");
    }

    #[test]
    fn ladder_bounded_at_three_halves() {
        let one = PolynomialCm::constant(1, 1.0);
        let sq = PolynomialCm::norm_power(1, 1, 1.0);
        for f in [one, sq] {
            let lad = gint_ladder(&quartic(1), &f, &[100, 200, 400, 800], 1).unwrap();
            assert!(lad.pass, "{:?}", lad.scaled);
        }
    }

    #[test]
    fn truncated_series_brackets_closed_form() {
        let one = PolynomialCm::constant(1, 1.0);
        let r = gint_identity_residual(&quartic(1), &one, 100, 1).unwrap();
        let s = gint_series_rhs(&quartic(1), &one, 100, 1, 200).unwrap();
        assert!(s.partial_sum <= r.rhs + 1e-12);
        assert!(r.rhs <= s.partial_sum + s.tail_bound + 1e-12, "{} {} {}", r.rhs, s.partial_sum, s.tail_bound);
        assert!(((r.lhs - r.rhs).abs() - r.residual).abs() < 1e-12);
    }

    #[test]
    fn two_dimensional_case() {
        let one = PolynomialCm::constant(2, 1.0);
        let alpha = PolynomialCm::new(2, vec![]).unwrap();
        let r = gint_identity_residual(&alpha, &one, 50, 2).unwrap();
        // ∫_{C²} G(e^{-|u|²}) = (π²/4π²) Σ 1/n⁴ = ζ(4)/4
        assert!((r.lhs / (riemann_zeta(4.0).unwrap() / 4.0) - 1.0).abs() < 1e-6, "{}", r.lhs);
        let lad = gint_ladder(&quartic(2), &one, &[100, 200, 400], 2).unwrap();
        assert!(lad.pass, "{:?}", lad.scaled);
    }

    #[test]
    fn rejects_bad_inputs() {
        let one = PolynomialCm::constant(1, 1.0);
        let linear = PolynomialCm::new(
            1,
            vec![Monomial {
                coeff: Complex64::new(1.0, 0.0),
                powers: vec![(1, 0)],
            }],
        )
        .unwrap();
        assert!(gint_identity_residual(&linear, &one, 100, 1).is_err());
        let huge = PolynomialCm::norm_power(1, 1, -1e6);
        assert!(matches!(
            gint_identity_residual(&huge, &one, 10, 1),
            Err(Error::Domain { .. })
        ));
        assert!(gint_identity_residual(&quartic(3), &PolynomialCm::constant(3, 1.0), 10, 3).is_err());
    }

    #[test]
    fn norm_power_expansion() {
        let p = PolynomialCm::norm_power(2, 2, 0.5);
        let u = [Complex64::new(0.3, -0.4), Complex64::new(1.1, 0.2)];
        let r2 = u[0].norm_sqr() + u[1].norm_sqr();
        assert!((p.eval(&u) - 0.5 * r2 * r2).abs() < 1e-14);
        assert_eq!(p.min_degree(), 4);
    }
}
