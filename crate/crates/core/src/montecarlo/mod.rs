//! The SU(2) ensemble: `s = Σ c_j S_j` with i.i.d. standard complex Gaussian
//! `c_j` in the orthonormal basis `S_j = √((k+1)C(k,j)/π) z^j`; its zeros;
//! linear statistics and their empirical variance; number statistics.

pub(crate) mod rng;
mod roots;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{geodesic_distance, ProjectivePoint, TestForm};
use crate::quadrature::KahanSum;
use crate::specfun::riemann_zeta;

pub use roots::BACKWARD_TOL;

/// Coefficients of one random section in the orthonormal monomial basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionSample {
    pub k: u32,
    pub coeffs: Vec<Complex64>,
}

/// The `k` zeros of a section as points of `CP¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet {
    pub k: u32,
    pub points: Vec<ProjectivePoint>,
    /// Largest `|s(x)|/(max|a_j|·k)` over the roots, each in the chart where
    /// its coordinate has modulus at most one.
    pub max_backward_error: f64,
    pub used_fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCEstimate {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub stderr_mean: f64,
    /// `√((μ₄ − σ⁴)/N)` from the empirical fourth central moment.
    pub stderr_variance: f64,
    /// Accepted samples.
    pub n_samples: usize,
    pub seed: u64,
    pub n_rejected: usize,
}

/// Largest tolerated fraction of rejected samples in one estimate.
pub const MAX_REJECTION_RATE: f64 = 1e-3;

/// `k + 1` i.i.d. standard complex Gaussians, addressed by `(seed, index, j)`.
pub fn sample_section(k: u32, seed: u64, index: u64) -> Result<SectionSample> {
    if k < 1 {
        return Err(Error::domain("sample_section", "degree k must be at least 1"));
    }
    Ok(SectionSample {
        k,
        coeffs: rng::gaussian_vector(seed, index, k as usize + 1),
    })
}

/// `√C(k, j)` for `j = 0..=k`, divided by the largest one so that nothing
/// overflows at large `k` (a common factor does not move the roots).
fn binomial_weights(k: u32) -> Vec<f64> {
    let k = k as usize;
    let mut ln_fact = vec![0.0; k + 1];
    for i in 1..=k {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let half: Vec<f64> = (0..=k).map(|j| 0.5 * (ln_fact[k] - ln_fact[j] - ln_fact[k - j])).collect();
    let max = half.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    half.into_iter().map(|h| (h - max).exp()).collect()
}

/// Zeros of `Σ c_j √C(k,j) z^j` (the section in the affine chart), certified
/// by backward error.
pub fn zeros_of_section(s: &SectionSample) -> Result<ZeroSet> {
    let weights = binomial_weights(s.k);
    if s.coeffs.len() != weights.len() {
        return Err(Error::domain(
            "zeros_of_section",
            format!("expected {} coefficients, got {}", weights.len(), s.coeffs.len()),
        ));
    }
    let poly: Vec<Complex64> = s.coeffs.iter().zip(&weights).map(|(c, w)| c * w).collect();
    let found = roots::sphere_roots(&poly)?;
    let points = found
        .roots
        .iter()
        .map(|&(x, conj)| {
            if conj {
                ProjectivePoint::from_conjugate(x)
            } else {
                ProjectivePoint::from_affine(x)
            }
        })
        .collect();
    Ok(ZeroSet {
        k: s.k,
        points,
        max_backward_error: found.max_backward_error,
        used_fallback: found.used_fallback,
    })
}

/// `(Z_s, ψ) = Σ_{s(a)=0} ψ(a)`.
pub fn linear_statistic(zs: &ZeroSet, tf: &TestForm) -> f64 {
    zs.points.iter().map(|p| tf.psi(p)).sum()
}

/// Per-sample values of `stat(zeros)` for indices `0..n`, in index order;
/// `None` marks a rejected sample.
fn sample_values<F>(k: u32, n_samples: usize, seed: u64, stat: F) -> Result<Vec<Option<f64>>>
where
    F: Fn(&ZeroSet) -> f64 + Sync,
{
    if k < 1 {
        return Err(Error::domain("montecarlo", "degree k must be at least 1"));
    }
    Ok((0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let s = sample_section(k, seed, i).ok()?;
            zeros_of_section(&s).ok().map(|z| stat(&z))
        })
        .collect())
}

/// Linear statistics of `n_samples` independent sections (rejected samples
/// are dropped).
pub fn linear_statistic_samples(k: u32, tf: &TestForm, n_samples: usize, seed: u64) -> Result<Vec<f64>> {
    Ok(sample_values(k, n_samples, seed, |z| linear_statistic(z, tf))?
        .into_iter()
        .flatten()
        .collect())
}

/// Mean, unbiased variance and fourth-moment standard errors, accumulated in
/// index order so the bits do not depend on the thread count.
fn summarize(values: &[Option<f64>], seed: u64) -> Result<MCEstimate> {
    let accepted: Vec<f64> = values.iter().flatten().copied().collect();
    let n_rejected = values.len() - accepted.len();
    let rate = n_rejected as f64 / values.len().max(1) as f64;
    if rate > MAX_REJECTION_RATE {
        return Err(Error::Rejection {
            rejected: n_rejected,
            total: values.len(),
            rate,
            limit: MAX_REJECTION_RATE,
        });
    }
    let n = accepted.len();
    if n < 2 {
        return Err(Error::domain("montecarlo", "need at least 2 accepted samples"));
    }
    let nf = n as f64;
    let mean = accepted.iter().copied().collect::<KahanSum>().value() / nf;
    let m2 = accepted.iter().map(|x| (x - mean).powi(2)).collect::<KahanSum>().value() / nf;
    let m4 = accepted.iter().map(|x| (x - mean).powi(4)).collect::<KahanSum>().value() / nf;
    let variance = m2 * nf / (nf - 1.0);
    Ok(MCEstimate {
        mean,
        variance,
        stderr_mean: (variance / nf).sqrt(),
        stderr_variance: ((m4 - m2 * m2).max(0.0) / nf).sqrt(),
        n_samples: n,
        seed,
        n_rejected,
    })
}

/// Empirical variance of `(Z_{s_k}, ψ)` over `n_samples` sections.
pub fn mc_variance(k: u32, tf: &TestForm, n_samples: usize, seed: u64) -> Result<MCEstimate> {
    if n_samples < 2 {
        return Err(Error::domain("mc_variance", "need at least 2 samples"));
    }
    let values = sample_values(k, n_samples, seed, |z| linear_statistic(z, tf))?;
    summarize(&values, seed)
}

/// Number of zeros in the geodesic disk `U` of radius `r` about `[0:1]`,
/// against the theory: `E N = k·Area(U)/π` and
/// `Var N ≈ ζ(3/2)/(8π^{3/2}) · Length(∂U) · √k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NumberVariance {
    pub estimate: MCEstimate,
    pub radius: f64,
    /// `π sin² r` on the sphere of radius ½.
    pub area: f64,
    /// `π sin 2r`.
    pub boundary_length: f64,
    pub theory_mean: f64,
    pub theory_variance: f64,
    /// `variance / √k`.
    pub variance_per_sqrt_k: f64,
    /// `variance / theory_variance`.
    pub ratio: f64,
}

pub fn mc_number_variance(k: u32, radius: f64, n_samples: usize, seed: u64) -> Result<NumberVariance> {
    if !(radius > 0.0 && radius < std::f64::consts::FRAC_PI_2) {
        return Err(Error::domain("mc_number_variance", format!("radius {radius} not in (0, π/2)")));
    }
    if n_samples < 2 {
        return Err(Error::domain("mc_number_variance", "need at least 2 samples"));
    }
    let centre = ProjectivePoint::origin();
    let values = sample_values(k, n_samples, seed, |z| {
        z.points.iter().filter(|p| geodesic_distance(&centre, p) < radius).count() as f64
    })?;
    let estimate = summarize(&values, seed)?;
    let area = PI * radius.sin().powi(2);
    let boundary_length = PI * (2.0 * radius).sin();
    let kf = k as f64;
    let theory_variance = riemann_zeta(1.5)? / (8.0 * PI.powf(1.5)) * boundary_length * kf.sqrt();
    Ok(NumberVariance {
        estimate,
        radius,
        area,
        boundary_length,
        theory_mean: kf * area / PI,
        theory_variance,
        variance_per_sqrt_k: estimate.variance / kf.sqrt(),
        ratio: estimate.variance / theory_variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_section(10, 42, 0).unwrap();
        let b = sample_section(10, 42, 0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_section(10, 42, 1).unwrap());
        assert_eq!(a.coeffs.len(), 11);
        assert!(sample_section(0, 1, 1).is_err());
    }

    #[test]
    fn first_and_second_moments() {
        let n = 100_000;
        let (mut s2, mut sq) = (0.0, Complex64::new(0.0, 0.0));
        for i in 0..n {
            let c = sample_section(1, 9, i).unwrap().coeffs[1];
            s2 += c.norm_sqr();
            sq += c * c;
        }
        let nf = n as f64;
        assert!((s2 / nf - 1.0).abs() < 5.0 / nf.sqrt());
        assert!((sq / nf).norm() < 5.0 / nf.sqrt());
    }

    #[test]
    fn linear_section_zero() {
        let s = SectionSample {
            k: 1,
            coeffs: vec![Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.3)],
        };
        let zs = zeros_of_section(&s).unwrap();
        // weights √C(1,j) are both 1
        let want = ProjectivePoint::from_affine(-s.coeffs[0] / s.coeffs[1]);
        assert!(geodesic_distance(&zs.points[0], &want) < 1e-14);
    }

    #[test]
    fn zero_counts_and_certificates() {
        for i in 0..50 {
            let s = sample_section(60, 3, i).unwrap();
            let zs = zeros_of_section(&s).unwrap();
            assert_eq!(zs.points.len(), 60);
            assert!(zs.max_backward_error <= BACKWARD_TOL);
            let ones = TestForm::by_name("const").unwrap();
            assert_eq!(linear_statistic(&zs, &ones), 60.0);
        }
    }

    #[test]
    fn antipodal_pairs_cancel_height() {
        let psi1 = TestForm::by_name("psi1").unwrap();
        let p = ProjectivePoint::from_affine(Complex64::new(0.3, -1.2));
        let zs = ZeroSet {
            k: 2,
            points: vec![p, p.antipode()],
            max_backward_error: 0.0,
            used_fallback: false,
        };
        assert!(linear_statistic(&zs, &psi1).abs() < 1e-15);
    }

    #[test]
    fn constant_form_has_zero_variance() {
        let est = mc_variance(8, &TestForm::by_name("const").unwrap(), 200, 5).unwrap();
        assert_eq!(est.variance, 0.0);
        assert_eq!(est.mean, 8.0);
        assert_eq!(est.n_rejected, 0);
    }

    #[test]
    fn small_k_matches_exact_variance() {
        // one uniform root: Var(height) = 1/3, mean 0
        let est = mc_variance(1, &TestForm::by_name("psi1").unwrap(), 20_000, 17).unwrap();
        assert!((est.variance - 1.0 / 3.0).abs() < 4.0 * est.stderr_variance);
        assert!(est.mean.abs() < 4.0 * est.stderr_mean);
    }

    #[test]
    fn estimate_is_reproducible() {
        let tf = TestForm::by_name("bump").unwrap();
        let a = mc_variance(12, &tf, 300, 77).unwrap();
        let b = mc_variance(12, &tf, 300, 77).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn number_variance_limits() {
        let nv = mc_number_variance(20, 1.5706, 200, 1).unwrap();
        assert!(nv.estimate.mean > 19.0);
        let nv = mc_number_variance(20, std::f64::consts::FRAC_PI_4, 2000, 2).unwrap();
        assert!((nv.estimate.mean - 10.0).abs() < 4.0 * nv.estimate.stderr_mean);
        assert!((nv.boundary_length - PI).abs() < 1e-15);
        assert!(mc_number_variance(20, 0.0, 10, 1).is_err());
    }
}
