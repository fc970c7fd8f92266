//! Gaussian moments `E[v^{j₁}⋯v^{j_a} v̄^{l₁}⋯v̄^{l_b}]` of a standard complex
//! Gaussian vector `v ∈ C^m` (density `e^{-|v|²}/π^m`) by the Wick formula,
//! and the curvature contraction used in the second-order coefficient.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::CurvatureData;
use crate::montecarlo::rng::gaussian_vector;

/// Permanent of a square matrix by Ryser's formula with Gray-code updates,
/// `O(2ⁿ n)`.
pub fn permanent(matrix: &[Vec<i64>]) -> i64 {
    let n = matrix.len();
    if n == 0 {
        return 1;
    }
    assert!(n < 63, "permanent of a {n}×{n} matrix is out of reach");
    let mut row_sums = vec![0i64; n];
    let mut total = 0i64;
    let mut prev_gray = 0u64;
    for s in 1u64..(1u64 << n) {
        let gray = s ^ (s >> 1);
        let flipped = (gray ^ prev_gray).trailing_zeros() as usize;
        let sign_in = if gray & (1 << flipped) != 0 { 1 } else { -1 };
        for (i, row) in matrix.iter().enumerate() {
            row_sums[i] += sign_in * row[flipped];
        }
        prev_gray = gray;
        let prod: i64 = row_sums.iter().product();
        let parity = if (n as u32 - gray.count_ones()).is_multiple_of(2) { 1 } else { -1 };
        total += parity * prod;
    }
    total
}

/// Wick's formula: the number of bijections `σ` from the holomorphic indices
/// to the antiholomorphic ones with `up[i] = bar[σ(i)]` for all `i`, i.e. the
/// permanent of the 0/1 match matrix. Indices run over `1..=m`.
pub fn wick_moment(m: usize, up: &[usize], bar: &[usize]) -> Result<i64> {
    if let Some(bad) = up.iter().chain(bar).find(|&&i| i < 1 || i > m) {
        return Err(Error::domain("wick_moment", format!("index {bad} outside 1..={m}")));
    }
    if up.len() != bar.len() {
        return Ok(0);
    }
    let matrix: Vec<Vec<i64>> = up
        .iter()
        .map(|&j| bar.iter().map(|&l| i64::from(j == l)).collect())
        .collect();
    Ok(permanent(&matrix))
}

/// `Σ R[j,l̄,p,q̄] E[v^j v̄^l v^p v̄^q] = Σ R[j,l̄,p,q̄](δ_jl δ_pq + δ_jq δ_pl)`,
/// which is `2ρ` by the Kähler symmetries.
pub fn curvature_contraction(r: &CurvatureData) -> Result<f64> {
    let m = r.dim;
    let mut acc = 0.0;
    for j in 0..m {
        for l in 0..m {
            for p in 0..m {
                for q in 0..m {
                    let w = wick_moment(m, &[j + 1, p + 1], &[l + 1, q + 1])?;
                    acc += r.get(j, l, p, q) * w as f64;
                }
            }
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub mean: Complex64,
    /// `√(E|X - mean|² / N)`.
    pub stderr: f64,
    pub n_samples: usize,
}

/// Monte Carlo estimates of many moments from one shared sample of
/// `n_samples` standard complex Gaussian vectors in `C^m`. Moments are given
/// as `(up, bar)` index lists over `1..=m`.
pub fn gaussian_moment_mc(
    m: usize,
    moments: &[(Vec<usize>, Vec<usize>)],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<MomentEstimate>> {
    if n_samples < 2 {
        return Err(Error::domain("gaussian_moment_mc", "need at least 2 samples"));
    }
    let max_deg = moments
        .iter()
        .map(|(u, b)| u.len().max(b.len()))
        .max()
        .unwrap_or(0);
    // exponent tables: per moment, per coordinate, (power of v, power of v̄)
    let exps: Vec<Vec<(usize, usize)>> = moments
        .iter()
        .map(|(up, bar)| {
            let mut e = vec![(0, 0); m];
            for &j in up {
                e[j.checked_sub(1).filter(|&x| x < m).ok_or_else(|| bad_index(j, m))?].0 += 1;
            }
            for &l in bar {
                e[l.checked_sub(1).filter(|&x| x < m).ok_or_else(|| bad_index(l, m))?].1 += 1;
            }
            Ok(e)
        })
        .collect::<Result<_>>()?;
    const CHUNK: usize = 4096;
    let n_chunks = n_samples.div_ceil(CHUNK);
    // Per chunk: Σ X and Σ |X|² for every moment, reduced afterwards in chunk order.
    let partials: Vec<Vec<(Complex64, f64)>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![(Complex64::new(0.0, 0.0), 0.0); moments.len()];
            let mut pow = vec![vec![Complex64::new(1.0, 0.0); max_deg + 1]; m];
            for s in c * CHUNK..((c + 1) * CHUNK).min(n_samples) {
                let v = gaussian_vector(seed, s as u64, m);
                for (j, vj) in v.iter().enumerate() {
                    for d in 1..=max_deg {
                        pow[j][d] = pow[j][d - 1] * vj;
                    }
                }
                for (a, e) in acc.iter_mut().zip(&exps) {
                    let x = e
                        .iter()
                        .enumerate()
                        .fold(Complex64::new(1.0, 0.0), |x, (j, &(pu, pb))| x * pow[j][pu] * pow[j][pb].conj());
                    a.0 += x;
                    a.1 += x.norm_sqr();
                }
            }
            acc
        })
        .collect();
    let n = n_samples as f64;
    Ok((0..moments.len())
        .map(|i| {
            let (s1, s2) = partials
                .iter()
                .fold((Complex64::new(0.0, 0.0), 0.0), |(a, b), p| (a + p[i].0, b + p[i].1));
            let mean = s1 / n;
            let var = ((s2 - n * mean.norm_sqr()) / (n - 1.0)).max(0.0);
            MomentEstimate {
                mean,
                stderr: (var / n).sqrt(),
                n_samples,
            }
        })
        .collect())
}

fn bad_index(i: usize, m: usize) -> Error {
    Error::domain("gaussian_moment_mc", format!("index {i} outside 1..={m}"))
}

/// All `(up, bar)` pairs of sorted index multisets over `1..=m` with
/// `|up| + |bar| ≤ max_degree`.
pub fn moment_catalogue(m: usize, max_degree: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    fn multisets(m: usize, size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..=m {
            cur.push(i);
            multisets(m, size, i, cur, out);
            cur.pop();
        }
    }
    let by_size: Vec<Vec<Vec<usize>>> = (0..=max_degree)
        .map(|s| {
            let mut out = Vec::new();
            multisets(m, s, 1, &mut Vec::new(), &mut out);
            out
        })
        .collect();
    let mut cat = Vec::new();
    for a in 0..=max_degree {
        for b in 0..=max_degree - a {
            for up in &by_size[a] {
                for bar in &by_size[b] {
                    cat.push((up.clone(), bar.clone()));
                }
            }
        }
    }
    cat
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> i64 {
        (1..=n as i64).product()
    }

    #[test]
    fn basic_moments() {
        assert_eq!(wick_moment(1, &[1], &[1]).unwrap(), 1);
        assert_eq!(wick_moment(1, &[1, 1], &[1, 1]).unwrap(), 2);
        assert_eq!(wick_moment(2, &[1], &[2]).unwrap(), 0);
        assert_eq!(wick_moment(2, &[1, 2], &[1]).unwrap(), 0);
        assert!(wick_moment(2, &[3], &[3]).is_err());
        assert_eq!(wick_moment(3, &[], &[]).unwrap(), 1);
    }

    #[test]
    fn permanent_matches_multiplicity_factorials() {
        // block structure: perm = Π n_i! when the multisets coincide
        for (up, bar) in moment_catalogue(3, 8) {
            let w = wick_moment(3, &up, &bar).unwrap();
            let mut a = up.clone();
            let mut b = bar.clone();
            a.sort();
            b.sort();
            let want = if a == b {
                (1..=3).map(|i| factorial(a.iter().filter(|&&x| x == i).count())).product()
            } else {
                0
            };
            assert_eq!(w, want, "{up:?} {bar:?}");
        }
        assert_eq!(permanent(&[vec![1, 2], vec![3, 4]]), 10);
    }

    #[test]
    fn contraction_is_twice_scalar_curvature() {
        for m in 1..=3 {
            let r = CurvatureData::complex_projective(m);
            assert_eq!(curvature_contraction(&r).unwrap(), 2.0 * r.rho);
            assert_eq!(r.rho, (m * (m + 1)) as f64);
        }
    }

    #[test]
    fn monte_carlo_low_degree() {
        let cat = moment_catalogue(2, 4);
        let est = gaussian_moment_mc(2, &cat, 50_000, 11).unwrap();
        for ((up, bar), e) in cat.iter().zip(&est) {
            let exact = wick_moment(2, up, bar).unwrap() as f64;
            let dev = (e.mean - Complex64::new(exact, 0.0)).norm();
            assert!(dev <= 5.0 * e.stderr + 1e-12, "{up:?} {bar:?}: {:?} vs {exact}", e.mean);
        }
        assert!(gaussian_moment_mc(2, &cat, 1, 0).is_err());
    }

    #[test]
    fn catalogue_size() {
        // Σ_{a+b≤2} C(a+1,1)C(b+1,1) for m = 2: 1 + 2 + 2 + 3 + 4 + 3
        assert_eq!(moment_catalogue(2, 2).len(), 15);
    }
}
