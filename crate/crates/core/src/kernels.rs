//! Szegő/Bergman kernel magnitudes for `O(k) → CP¹`, the normalized kernel
//! `P_k`, the variance kernel `Q_k = G(P_k²)`, off-diagonal decay
//! certification and the near-diagonal expansion residual.
//!
//! Everything is carried in the log domain: `k·log cos d` underflows in
//! linear space long before `k = 300`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{geodesic_distance, ProjectivePoint, Su2};
use crate::quadrature::GaussLegendre;
use crate::specfun::g_in_domain;

/// `log |Π_k(p, q)|`, with `-∞` standing for an exact zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub log_magnitude: f64,
    pub k: u32,
}

impl KernelValue {
    pub fn magnitude(&self) -> f64 {
        self.log_magnitude.exp()
    }

    pub fn is_zero(&self) -> bool {
        self.log_magnitude == f64::NEG_INFINITY
    }
}

fn check_degree(op: &'static str, k: u32) -> Result<()> {
    if k < 1 {
        return Err(Error::domain(op, "degree k must be at least 1"));
    }
    Ok(())
}

/// `log |⟨p, q⟩| = log cos d`. Near the diagonal this is `½ log(1 - sin²d)`,
/// which keeps full relative accuracy where `cos d` rounds to 1.
pub fn log_cos_distance(p: &ProjectivePoint, q: &ProjectivePoint) -> f64 {
    let wedge = (p.h0() * q.h1() - p.h1() * q.h0()).norm();
    if wedge < 0.5 {
        0.5 * (-wedge * wedge).ln_1p()
    } else {
        p.inner(q).norm().ln()
    }
}

/// Closed form `|Π_k(p, q)| = ((k+1)/π)·|⟨p, q⟩|^k`.
pub fn szego_magnitude(p: &ProjectivePoint, q: &ProjectivePoint, k: u32) -> Result<KernelValue> {
    check_degree("szego_magnitude", k)?;
    let log_cos = log_cos_distance(p, q);
    let log_magnitude = if log_cos == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        ((k as f64 + 1.0) / PI).ln() + k as f64 * log_cos
    };
    Ok(KernelValue { log_magnitude, k })
}

/// Log squared norms `log ‖h0^j h1^{k-j}‖²`, `j = 0..=k`, of the monomial
/// sections of `O(k)` under the Fubini–Study inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionNorms {
    pub k: u32,
    pub log_norms: Vec<f64>,
}

impl SectionNorms {
    /// By Gauss–Legendre quadrature in the Archimedes coordinate `s = |h0|²`,
    /// in which `ω = ½ ds dθ` and the norm is `π ∫₀¹ s^j (1-s)^{k-j} ds`.
    /// `⌊k/2⌋ + 2` nodes integrate the degree-`k` polynomial exactly.
    pub fn by_quadrature(k: u32) -> Result<Self> {
        check_degree("SectionNorms::by_quadrature", k)?;
        let rule = GaussLegendre::new(k as usize / 2 + 2);
        let logs: Vec<(f64, f64, f64)> = rule
            .on_interval(0.0, 1.0)
            .map(|(s, w)| (w.ln(), s.ln(), (-s).ln_1p()))
            .collect();
        let log_norms = (0..=k)
            .map(|j| {
                let (j, rest) = (j as f64, (k - j) as f64);
                PI.ln() + log_sum_exp(logs.iter().map(|&(lw, ls, l1s)| lw + j * ls + rest * l1s))
            })
            .collect();
        Ok(SectionNorms { k, log_norms })
    }

    /// Beta-function closed form `π · j!(k-j)!/(k+1)!`.
    pub fn closed_form(k: u32) -> Result<Self> {
        check_degree("SectionNorms::closed_form", k)?;
        let mut ln_fact = vec![0.0; k as usize + 2];
        for i in 1..ln_fact.len() {
            ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
        }
        let k = k as usize;
        let log_norms = (0..=k).map(|j| PI.ln() + ln_fact[j] + ln_fact[k - j] - ln_fact[k + 1]).collect();
        Ok(SectionNorms { k: k as u32, log_norms })
    }
}

/// `log Σ exp(x_i)` without overflow; `-∞` for an empty or all-`-∞` input.
pub(crate) fn log_sum_exp<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `|Π_k(p, q)| = |Σ_j S_j(p) S̄_j(q)|` over the orthonormal monomial basis,
/// evaluated after moving both points by an isometry to
/// `(sin a, cos a)` and `(sin b, cos b)` with `a, b ∈ [0, π/2]`.
/// In that frame every term of the sum is positive, so the sum is a
/// cancellation-free log-sum-exp; the kernel magnitude is SU(2)-invariant.
pub fn szego_magnitude_basis(
    p: &ProjectivePoint,
    q: &ProjectivePoint,
    norms: &SectionNorms,
) -> Result<KernelValue> {
    let k = norms.k;
    check_degree("szego_magnitude_basis", k)?;
    let d = geodesic_distance(p, q);
    if d >= FRAC_PI_2 {
        return Ok(KernelValue {
            log_magnitude: f64::NEG_INFINITY,
            k,
        });
    }
    // p -> [0:1], then a diagonal rotation makes q's homogeneous coordinates
    // share one phase, then a real rotation centres the pair about π/4.
    let to_origin = Su2::to_origin(p);
    let q1 = to_origin.apply(q);
    let rel = (q1.h0() * q1.h1().conj()).arg();
    let diag = Su2::new(Complex64::from_polar(1.0, -rel / 2.0), Complex64::new(0.0, 0.0))?;
    let theta = FRAC_PI_4 - d / 2.0;
    let real = Su2::new(Complex64::new(theta.cos(), 0.0), Complex64::new(theta.sin(), 0.0))?;
    let frame = real.compose(&diag).compose(&to_origin);
    let (pa, qa) = (frame.apply(p), frame.apply(q));
    let (lp0, lp1) = (pa.h0().norm().ln(), pa.h1().norm().ln());
    let (lq0, lq1) = (qa.h0().norm().ln(), qa.h1().norm().ln());
    let log_magnitude = log_sum_exp(norms.log_norms.iter().enumerate().map(|(j, ln)| {
        let (j, rest) = (j as f64, (k as usize - j) as f64);
        j * (lp0 + lq0) + rest * (lp1 + lq1) - ln
    }));
    Ok(KernelValue { log_magnitude, k })
}

/// The same basis sum taken literally in the given homogeneous coordinates,
/// with complex terms. Cancellation limits it to small `k`; kept as an
/// independent check of the aligned-frame route.
pub fn szego_magnitude_basis_raw(
    p: &ProjectivePoint,
    q: &ProjectivePoint,
    norms: &SectionNorms,
) -> Result<KernelValue> {
    let k = norms.k;
    check_degree("szego_magnitude_basis_raw", k)?;
    let mut sum = Complex64::new(0.0, 0.0);
    for (j, ln) in norms.log_norms.iter().enumerate() {
        let rest = k as i32 - j as i32;
        let sp = p.h0().powi(j as i32) * p.h1().powi(rest);
        let sq = q.h0().powi(j as i32) * q.h1().powi(rest);
        sum += sp * sq.conj() * (-ln).exp();
    }
    let m = sum.norm();
    Ok(KernelValue {
        log_magnitude: if m == 0.0 { f64::NEG_INFINITY } else { m.ln() },
        k,
    })
}

/// `P_k(p, q) = |Π_k(p, q)|/√(Π_k(p,p)Π_k(q,q)) = cos^k d ∈ [0, 1]`.
pub fn normalized_kernel(p: &ProjectivePoint, q: &ProjectivePoint, k: u32) -> f64 {
    (k as f64 * log_cos_distance(p, q)).exp()
}

/// `P_k` as a function of the geodesic distance alone.
pub fn normalized_kernel_at_distance(d: f64, k: u32) -> f64 {
    if d >= FRAC_PI_2 {
        0.0
    } else {
        (k as f64 * d.cos().ln()).exp()
    }
}

/// `Q_k(p, q) = G(P_k(p, q)²) ∈ [0, 1/24]`.
pub fn q_kernel(p: &ProjectivePoint, q: &ProjectivePoint, k: u32) -> f64 {
    g_in_domain((2.0 * k as f64 * log_cos_distance(p, q)).exp())
}

/// Sup of `P_k` on the circle at the decay threshold
/// `d_p = √((2p+1) log k / k)`, and its ratio to `k^{-p}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayReport {
    pub k: u32,
    pub p_exponent: f64,
    pub threshold: f64,
    pub sup_kernel: f64,
    pub ratio: f64,
}

/// Number of sample directions on the threshold circle. `P_k` is constant on
/// it by homogeneity, so this is a consistency check rather than a search.
const DECAY_DIRECTIONS: usize = 16;

pub fn decay_margin(k: u32, p_exponent: f64) -> Result<DecayReport> {
    if k < 2 {
        return Err(Error::domain("decay_margin", "k must be at least 2"));
    }
    if !(p_exponent > 0.0) {
        return Err(Error::domain("decay_margin", "decay exponent must be positive"));
    }
    let kf = k as f64;
    let threshold = ((2.0 * p_exponent + 1.0) * kf.ln() / kf).sqrt();
    let centre = ProjectivePoint::origin();
    let sup_kernel = if threshold >= FRAC_PI_2 {
        0.0
    } else {
        (0..DECAY_DIRECTIONS)
            .map(|i| {
                let beta = 2.0 * PI * i as f64 / DECAY_DIRECTIONS as f64;
                normalized_kernel(&centre, &centre.geodesic_offset(threshold, beta), k)
            })
            .fold(0.0, f64::max)
    };
    Ok(DecayReport {
        k,
        p_exponent,
        threshold,
        sup_kernel,
        ratio: sup_kernel * kf.powf(p_exponent),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayLadder {
    pub reports: Vec<DecayReport>,
    /// Each ratio is at most 1.1 times the previous one.
    pub pass: bool,
}

/// [`decay_margin`] over increasing `ks`, checking the ratios stay bounded.
pub fn decay_ladder(ks: &[u32], p_exponent: f64) -> Result<DecayLadder> {
    let reports = ks
        .iter()
        .map(|&k| decay_margin(k, p_exponent))
        .collect::<Result<Vec<_>>>()?;
    let pass = reports.windows(2).all(|w| w[1].ratio <= 1.1 * w[0].ratio);
    Ok(DecayLadder { reports, pass })
}

/// Square of the window constant for expansion tests, `|u|² ≤ 5 log k`.
pub const EXPANSION_WINDOW_B2: f64 = 5.0;

/// `r(u, k) = k·(e^{|u|²} P_k(z₀ + u/√k, z₀)² − 1) − ¼R(u,ū,u,ū)` at the
/// origin `z₀ = [0:1]` in the affine chart, where `¼R(u,ū,u,ū) = |u|⁴/2`.
/// The first correction to the Gaussian `e^{-|u|²}` is `|u|⁴/(2k)`, so `r`
/// is `O(1/k)`.
pub fn expansion_residual(u: Complex64, k: u32) -> Result<f64> {
    if k < 2 {
        return Err(Error::domain("expansion_residual", "k must be at least 2"));
    }
    let kf = k as f64;
    let x = u.norm_sqr();
    if !(x <= EXPANSION_WINDOW_B2 * kf.ln()) {
        return Err(Error::domain(
            "expansion_residual",
            format!("|u|² = {x} outside the window 5·log k = {}", EXPANSION_WINDOW_B2 * kf.ln()),
        ));
    }
    Ok(kf * gaussian_relative_excess(u, k) - 0.5 * x * x)
}

/// `e^{|u|²} P_k(z₀ + u/√k, z₀)² − 1`, computed as one `expm1`.
pub fn gaussian_relative_excess(u: Complex64, k: u32) -> f64 {
    let kf = k as f64;
    let z0 = ProjectivePoint::origin();
    let w = ProjectivePoint::from_affine(u / kf.sqrt());
    (u.norm_sqr() + 2.0 * kf * log_cos_distance(&z0, &w)).exp_m1()
}

/// Least-squares coefficients `(c_half, c_one)` of
/// `e^{|u|²}P_k² − 1 ≈ c_half k^{-1/2} + c_one k^{-1}` over `ks` at fixed `u`.
/// The expansion has no `k^{-1/2}` term, so `c_half` should vanish.
pub fn first_order_fit(u: Complex64, ks: &[u32]) -> Result<(f64, f64)> {
    if ks.len() < 2 {
        return Err(Error::domain("first_order_fit", "need at least two degrees"));
    }
    let rows: Vec<[f64; 2]> = ks.iter().map(|&k| [1.0 / (k as f64).sqrt(), 1.0 / k as f64]).collect();
    let design = nalgebra::DMatrix::from_fn(ks.len(), 2, |i, j| rows[i][j]);
    let rhs = nalgebra::DVector::from_iterator(ks.len(), ks.iter().map(|&k| gaussian_relative_excess(u, k)));
    let sol = design
        .svd(true, true)
        .solve(&rhs, 1e-300)
        .map_err(|e| Error::numerical("first_order_fit", e.to_string()))?;
    Ok((sol[0], sol[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SphereQuadrature;
    use crate::specfun::{g_function, SeriesTolerance};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_value() {
        for s in 0..10 {
            let p = ProjectivePoint::from_affine(c(0.3 * s as f64, -0.7));
            let kv = szego_magnitude(&p, &p, 10).unwrap();
            assert!((kv.magnitude() / (11.0 / PI) - 1.0).abs() < 1e-12);
        }
        let kv = szego_magnitude(&ProjectivePoint::origin(), &ProjectivePoint::origin(), 10).unwrap();
        assert!((kv.magnitude() - 3.501408748021697).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_points_give_zero_sentinel() {
        let a = ProjectivePoint::infinity();
        let b = ProjectivePoint::origin();
        for k in [1, 7, 300] {
            assert!(szego_magnitude(&a, &b, k).unwrap().is_zero());
            assert_eq!(normalized_kernel(&a, &b, k), 0.0);
            assert_eq!(q_kernel(&a, &b, k), 0.0);
        }
        assert!(szego_magnitude(&a, &b, 0).is_err());
    }

    #[test]
    fn three_term_basis_sum_at_k2() {
        // |Π_2([0:1], z=1)| = (3/π)(1/√2)² = 3/(2π)
        let p = ProjectivePoint::origin();
        let q = ProjectivePoint::from_affine(c(1.0, 0.0));
        let norms = SectionNorms::by_quadrature(2).unwrap();
        let want = 3.0 / (2.0 * PI);
        for kv in [
            szego_magnitude(&p, &q, 2).unwrap(),
            szego_magnitude_basis(&p, &q, &norms).unwrap(),
            szego_magnitude_basis_raw(&p, &q, &norms).unwrap(),
        ] {
            assert!((kv.magnitude() / want - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn norms_quadrature_matches_beta() {
        for k in [1, 2, 10, 50, 300] {
            let a = SectionNorms::by_quadrature(k).unwrap();
            let b = SectionNorms::closed_form(k).unwrap();
            for (x, y) in a.log_norms.iter().zip(&b.log_norms) {
                assert!((x - y).abs() < 1e-11, "k={k}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn raw_and_aligned_routes_agree_small_k() {
        for k in 1..=10 {
            let norms = SectionNorms::by_quadrature(k).unwrap();
            for s in 0..10 {
                let p = ProjectivePoint::new(c(0.1 * s as f64, 0.4), c(0.9, -0.2 * s as f64)).unwrap();
                let q = ProjectivePoint::new(c(-0.5, 0.3), c(0.2 * s as f64, 1.0)).unwrap();
                let a = szego_magnitude_basis(&p, &q, &norms).unwrap().log_magnitude;
                let b = szego_magnitude_basis_raw(&p, &q, &norms).unwrap().log_magnitude;
                let cf = szego_magnitude(&p, &q, k).unwrap().log_magnitude;
                assert!((a - cf).abs() < 1e-11 && (b - cf).abs() < 1e-10, "k={k} {a} {b} {cf}");
            }
        }
    }

    #[test]
    fn no_overflow_at_large_degree() {
        let p = ProjectivePoint::from_affine(c(0.2, 0.1));
        let q = ProjectivePoint::from_affine(c(-1.3, 2.0));
        let kv = szego_magnitude(&p, &q, 100_000).unwrap();
        assert!(kv.log_magnitude.is_finite() && kv.log_magnitude < -1000.0);
    }

    #[test]
    fn normalized_kernel_properties() {
        let p = ProjectivePoint::from_affine(c(0.4, -0.9));
        assert_eq!(normalized_kernel(&p, &p, 50), 1.0);
        let q = ProjectivePoint::from_affine(c(1.4, 0.2));
        assert_eq!(normalized_kernel(&p, &q, 7), normalized_kernel(&q, &p, 7));
        let d = geodesic_distance(&p, &q);
        assert!((normalized_kernel(&p, &q, 7) - d.cos().powi(7)).abs() < 1e-14);
        // P_k²(0, u/√k) = (1+|u|²/k)^{-k}
        let u = c(0.8, 1.1);
        let k = 40;
        let w = ProjectivePoint::from_affine(u / (k as f64).sqrt());
        let want = (1.0 + u.norm_sqr() / k as f64).powi(-(k as i32));
        assert!((normalized_kernel(&ProjectivePoint::origin(), &w, k).powi(2) / want - 1.0).abs() < 1e-13);
    }

    #[test]
    fn monotone_in_distance() {
        let o = ProjectivePoint::origin();
        for k in [1, 10, 100] {
            let mut last = 2.0;
            for i in 0..=200 {
                let d = FRAC_PI_2 * i as f64 / 200.0;
                let v = normalized_kernel(&o, &o.geodesic_offset(d, 0.3), k);
                assert!(v < last || (v == 0.0 && last == 0.0) || i == 0, "k={k} i={i}");
                last = v;
            }
        }
    }

    #[test]
    fn q_kernel_values() {
        let p = ProjectivePoint::from_affine(c(0.4, 0.1));
        assert!((q_kernel(&p, &p, 9) - 1.0 / 24.0).abs() < 1e-15);
        // k = 100, d = 0.1: G(cos^200(0.1))
        let q = p.geodesic_offset(0.1, 1.0);
        let t = (200.0 * 0.1f64.cos().ln()).exp();
        assert!((t - 0.367_265_182_164_787_5).abs() < 1e-13, "{t}");
        let want = g_function(t, SeriesTolerance::default()).unwrap();
        assert!((q_kernel(&p, &q, 100) - want).abs() < 1e-13);
        assert!((want - 0.010_334_471_862_894_04).abs() < 1e-13, "{want}");
    }

    #[test]
    fn projection_identity() {
        let quad = SphereQuadrature::default();
        for k in [1, 5, 20, 50] {
            let z = ProjectivePoint::from_affine(c(0.3, 0.8));
            let total = quad.integrate(|w| normalized_kernel(&z, w, k).powi(2)) * (k as f64 + 1.0) / PI;
            assert!((total - 1.0).abs() < 1e-6, "k={k}: {total}");
        }
    }

    #[test]
    fn decay_examples() {
        let r = decay_margin(100, 1.0).unwrap();
        assert!((r.threshold - (3.0 * 100f64.ln() / 100.0).sqrt()).abs() < 1e-15);
        assert!(r.ratio <= 1.0);
        // ~ k^{-3/2}: the kernel at the threshold is within a factor 2 of it
        assert!(r.sup_kernel > 0.5 * 100f64.powf(-1.5) && r.sup_kernel < 2.0 * 100f64.powf(-1.5));
        let r4 = decay_margin(4, 0.5).unwrap();
        assert!(r4.sup_kernel >= 0.0);
        assert!(decay_ladder(&[50, 100, 200], 1.0).unwrap().pass);
        assert!(decay_margin(1, 1.0).is_err());
        assert!(decay_margin(10, 0.0).is_err());
    }

    #[test]
    fn expansion_residual_examples() {
        assert_eq!(expansion_residual(c(0.0, 0.0), 50).unwrap(), 0.0);
        let r100 = expansion_residual(c(1.0, 0.0), 100).unwrap();
        assert!(r100.abs() <= 0.02);
        // next order: (|u|⁸/8 − |u|⁶/3)/k
        assert!((r100 * 100.0 + 5.0 / 24.0).abs() < 0.01, "{r100}");
        for k in [100, 200, 400] {
            let ratio = expansion_residual(c(1.0, 0.0), 2 * k).unwrap() / expansion_residual(c(1.0, 0.0), k).unwrap();
            assert!((ratio - 0.5).abs() < 0.075, "{ratio}");
        }
        assert!(expansion_residual(c(10.0, 0.0), 100).is_err());
        assert!(expansion_residual(c(0.5, 0.0), 1).is_err());
    }

    #[test]
    fn no_half_order_term() {
        let ks = [200, 400, 800, 1600, 3200];
        for u in [c(0.5, 0.0), c(1.0, 0.0), c(0.7, 0.9)] {
            let (half, one) = first_order_fit(u, &ks).unwrap();
            assert!(half.abs() <= 1e-3, "{half}");
            assert!((one - 0.5 * u.norm_sqr().powi(2)).abs() < 0.05, "{one}");
        }
    }
}
