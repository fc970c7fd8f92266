//! All roots of a polynomial on the Riemann sphere.
//!
//! Aberth–Ehrlich iteration from Newton-polygon starting points, with each
//! Newton quotient evaluated in the chart where the current iterate has
//! modulus at most one (`p(z)` for `|z| ≤ 1`, the reversed polynomial
//! `q(w) = w^k p(1/w)` otherwise). A companion-matrix eigenvalue solve is the
//! fallback when Aberth stalls.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Roots with their backward errors.
#[derive(Debug, Clone)]
pub(crate) struct SphereRoots {
    /// `(coordinate, in_conjugate_chart)`: `z` itself, or `w = 1/z`.
    pub roots: Vec<(Complex64, bool)>,
    pub max_backward_error: f64,
    pub used_fallback: bool,
}

const MAX_ITERATIONS: usize = 200;
/// Certificate threshold for `|p(x)| / (max|a_j| · k)` in the root's chart.
pub const BACKWARD_TOL: f64 = 1e-8;

/// Horner evaluation of `p` and `p'` at `x`.
fn horner(coeffs: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Horner evaluation of the reversed polynomial `q(w) = Σ a_{k-j} w^j`.
fn horner_rev(coeffs: &[Complex64], w: Complex64) -> (Complex64, Complex64) {
    let mut q = Complex64::new(0.0, 0.0);
    let mut dq = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter() {
        dq = dq * w + q;
        q = q * w + c;
    }
    (q, dq)
}

/// `p(z)/p'(z)`, evaluated in the chart where `|coordinate| ≤ 1`.
fn newton_quotient(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let k = (coeffs.len() - 1) as f64;
    if z.norm_sqr() <= 1.0 {
        let (p, dp) = horner(coeffs, z);
        p / dp
    } else {
        // p(z) = z^k q(w), p'(z) = z^{k-1}(k q - w q'), w = 1/z
        let w = z.inv();
        let (q, dq) = horner_rev(coeffs, w);
        z * q / (k * q - w * dq)
    }
}

/// `|p(x)|/(max|a|·k)` in the chart where the root has modulus ≤ 1.
fn backward_error(coeffs: &[Complex64], z: Complex64, scale: f64) -> (f64, Complex64, bool) {
    let k = (coeffs.len() - 1) as f64;
    if z.norm_sqr() <= 1.0 {
        (horner(coeffs, z).0.norm() / (scale * k), z, false)
    } else {
        let w = z.inv();
        (horner_rev(coeffs, w).0.norm() / (scale * k), w, true)
    }
}

/// Starting points on circles whose radii come from the upper convex hull of
/// `(j, log|a_j|)` (Bini's Newton-polygon rule).
fn initial_guesses(coeffs: &[Complex64]) -> Vec<Complex64> {
    let k = coeffs.len() - 1;
    let pts: Vec<(f64, f64)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(j, c)| (j as f64, c.norm().ln()))
        .collect();
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b if it lies on or below the segment a -> p
            if (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut guesses = Vec::with_capacity(k);
    for seg in hull.windows(2) {
        let (i, l) = (seg[0].0, seg[1].0);
        let count = (l - i) as usize;
        let radius = ((seg[0].1 - seg[1].1) / (l - i)).exp();
        for m in 0..count {
            let angle = std::f64::consts::TAU * m as f64 / count as f64 + 2.0 * std::f64::consts::PI * i / k as f64 + 0.4;
            guesses.push(Complex64::from_polar(radius, angle));
        }
    }
    guesses
}

/// Aberth–Ehrlich sweeps (Gauss–Seidel order). Roots whose last step is
/// below `STEP_TOL` relative to their modulus are frozen. After
/// `MAX_ITERATIONS` the current iterates are returned anyway; the backward
/// error certificate decides whether they are accepted.
fn aberth(coeffs: &[Complex64]) -> Option<Vec<Complex64>> {
    const STEP_TOL: f64 = 1e-13;
    let k = coeffs.len() - 1;
    let mut z = initial_guesses(coeffs);
    let mut done = vec![false; k];
    for _ in 0..MAX_ITERATIONS {
        let mut all_done = true;
        for i in 0..k {
            if done[i] {
                continue;
            }
            let ratio = newton_quotient(coeffs, z[i]);
            let zi = z[i];
            let mut repulsion = Complex64::new(0.0, 0.0);
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    let d = zi - zj;
                    repulsion += d.conj() / d.norm_sqr();
                }
            }
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.is_finite() {
                return None;
            }
            z[i] -= step;
            if step.norm() <= STEP_TOL * z[i].norm() {
                done[i] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }
    Some(z)
}

/// Eigenvalues of the companion matrix of the monic rescaled polynomial.
fn companion_roots(coeffs: &[Complex64]) -> Option<Vec<Complex64>> {
    let k = coeffs.len() - 1;
    let lead = coeffs[k];
    let mut m = nalgebra::DMatrix::<Complex64>::zeros(k, k);
    for i in 1..k {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..k {
        m[(i, k - 1)] = -coeffs[i] / lead;
    }
    let eig = m.schur().eigenvalues()?;
    Some(eig.iter().copied().collect())
}

/// Two Newton steps in the chart where `|coordinate| ≤ 1`.
fn polish(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut z = z;
    for _ in 0..2 {
        if z.norm_sqr() <= 1.0 {
            let (p, dp) = horner(coeffs, z);
            let s = p / dp;
            if s.is_finite() {
                z -= s;
            }
        } else {
            let mut w = z.inv();
            let (q, dq) = horner_rev(coeffs, w);
            let s = q / dq;
            if s.is_finite() {
                w -= s;
            }
            z = w.inv();
        }
    }
    z
}

fn certify(coeffs: &[Complex64], raw: Vec<Complex64>, used_fallback: bool) -> Option<SphereRoots> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut roots = Vec::with_capacity(raw.len());
    let mut worst: f64 = 0.0;
    for z in raw {
        let z = polish(coeffs, z);
        let (be, coord, conj) = backward_error(coeffs, z, scale);
        if !(be <= BACKWARD_TOL) {
            return None;
        }
        worst = worst.max(be);
        roots.push((coord, conj));
    }
    Some(SphereRoots {
        roots,
        max_backward_error: worst,
        used_fallback,
    })
}

/// All `k` roots of `Σ a_j z^j` on the sphere. Leading zero coefficients are
/// roots at infinity, trailing ones roots at zero.
pub(crate) fn sphere_roots(coeffs: &[Complex64]) -> Result<SphereRoots> {
    const NEGLIGIBLE: f64 = 1e-300;
    let k = coeffs.len().saturating_sub(1);
    let low = coeffs.iter().take_while(|c| c.norm() < NEGLIGIBLE).count();
    let high = coeffs.iter().rev().take_while(|c| c.norm() < NEGLIGIBLE).count();
    if low + high >= coeffs.len() || (coeffs[0].norm() < NEGLIGIBLE && coeffs[k].norm() < NEGLIGIBLE) {
        return Err(Error::numerical(
            "zeros_of_section",
            "leading and trailing coefficients both vanish",
        ));
    }
    let core = &coeffs[low..coeffs.len() - high];
    let mut found = if core.len() <= 1 {
        Some(SphereRoots {
            roots: Vec::new(),
            max_backward_error: 0.0,
            used_fallback: false,
        })
    } else if core.len() == 2 {
        certify(core, vec![-core[0] / core[1]], false)
    } else {
        aberth(core).and_then(|z| certify(core, z, false))
    };
    if found.is_none() {
        found = companion_roots(core).and_then(|z| certify(core, z, true));
    }
    let mut found = found.ok_or_else(|| {
        Error::numerical(
            "zeros_of_section",
            format!("no certified roots for degree {} after Aberth and companion fallback", core.len() - 1),
        )
    })?;
    found
        .roots
        .extend(std::iter::repeat_n((Complex64::new(0.0, 0.0), false), low));
    found
        .roots
        .extend(std::iter::repeat_n((Complex64::new(0.0, 0.0), true), high));
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn from_roots(roots: &[Complex64]) -> Vec<Complex64> {
        let mut p = vec![c(1.0)];
        for &r in roots {
            let mut next = vec![c(0.0); p.len() + 1];
            for (i, &a) in p.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= a * r;
            }
            p = next;
        }
        p
    }

    fn to_z((x, conj): (Complex64, bool)) -> Complex64 {
        if conj {
            x.inv()
        } else {
            x
        }
    }

    #[test]
    fn constructed_factorization() {
        let want: Vec<Complex64> = (1..=6).map(|i| c(i as f64)).collect();
        let r = sphere_roots(&from_roots(&want)).unwrap();
        let mut got: Vec<f64> = r.roots.iter().map(|&x| to_z(x).re).collect();
        got.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w.re).abs() < 1e-10, "{g} vs {w}");
        }
        assert!(r.max_backward_error <= BACKWARD_TOL);
    }

    #[test]
    fn linear_and_degenerate() {
        let r = sphere_roots(&[c(2.0), c(4.0)]).unwrap();
        assert!((to_z(r.roots[0]) - c(-0.5)).norm() < 1e-15);
        // z² · (z - 3): two roots at 0
        let r = sphere_roots(&[c(0.0), c(0.0), c(-3.0), c(1.0)]).unwrap();
        assert_eq!(r.roots.len(), 3);
        assert_eq!(r.roots.iter().filter(|x| x.0 == c(0.0) && !x.1).count(), 2);
        // degree drop: root at infinity
        let r = sphere_roots(&[c(1.0), c(1.0), c(0.0)]).unwrap();
        assert_eq!(r.roots.iter().filter(|x| x.0 == c(0.0) && x.1).count(), 1);
        assert!(sphere_roots(&[c(0.0), c(1.0), c(0.0)]).is_err());
    }

    #[test]
    fn companion_fallback_agrees() {
        let want: Vec<Complex64> = vec![c(0.5), Complex64::new(0.0, 2.0), c(-3.0), Complex64::new(1.0, 1.0)];
        let coeffs = from_roots(&want);
        let comp = certify(&coeffs, companion_roots(&coeffs).unwrap(), true).unwrap();
        assert!(comp.used_fallback);
        for w in &want {
            assert!(comp.roots.iter().any(|&x| (to_z(x) - w).norm() < 1e-10));
        }
    }

    #[test]
    fn wide_dynamic_range() {
        let want: Vec<Complex64> = vec![c(1e-6), c(1e6), Complex64::new(0.0, 1.0), c(-2.0)];
        let r = sphere_roots(&from_roots(&want)).unwrap();
        for w in &want {
            assert!(r.roots.iter().any(|&x| (to_z(x) / w - 1.0).norm() < 1e-9), "{w}");
        }
    }
}
