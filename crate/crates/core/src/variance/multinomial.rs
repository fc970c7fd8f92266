//! `(1 + Σ_{λ=2}^{p} C_λ x^λ)^n = 1 + Σ_j B_{pj}(C; n) x^j` with
//! `B_{pj} = Σ_{r ∈ 𝒫(j)} n(n-1)⋯(n-|r|+1)/(r₂!⋯r_p!) · Π C_λ^{r_λ}`,
//! `𝒫(j) = {r : Σ λ r_λ = j}`, `|r| = Σ r_λ`. The falling factorial vanishes
//! once `|r| > n`.

use crate::error::{Error, Result};

/// Visits every `r = (r_2, …, r_p)` with `Σ λ r_λ = j`.
fn for_each_partition(p: usize, j: u32, visit: &mut dyn FnMut(&[u32])) {
    fn rec(lambda: usize, p: usize, left: u32, r: &mut Vec<u32>, visit: &mut dyn FnMut(&[u32])) {
        if lambda > p {
            if left == 0 {
                visit(r);
            }
            return;
        }
        let mut count = 0;
        while count * lambda as u32 <= left {
            r.push(count);
            rec(lambda + 1, p, left - count * lambda as u32, r, visit);
            r.pop();
            count += 1;
        }
    }
    rec(2, p, j, &mut Vec::new(), visit);
}

fn check(c_len: usize) -> Result<usize> {
    if c_len == 0 {
        return Err(Error::domain("multinomial_expand", "need at least C₂ (p ≥ 2)"));
    }
    Ok(c_len + 1)
}

/// `B_{pj}(C₂,…,C_p; n)` in floating point; `c[0]` is `C₂`.
pub fn multinomial_expand(c: &[f64], n: u32, j: u32) -> Result<f64> {
    let p = check(c.len())?;
    let mut total = 0.0;
    for_each_partition(p, j, &mut |r| {
        let size: u32 = r.iter().sum();
        if size > n {
            return;
        }
        let mut term: f64 = (0..size).map(|i| f64::from(n - i)).product();
        for (idx, &rl) in r.iter().enumerate() {
            term /= (1..=rl).map(f64::from).product::<f64>();
            term *= c[idx].powi(rl as i32);
        }
        total += term;
    });
    Ok(total)
}

/// Exact integer version of [`multinomial_expand`].
pub fn multinomial_expand_exact(c: &[i64], n: u32, j: u32) -> Result<i128> {
    let p = check(c.len())?;
    let mut total: i128 = 0;
    for_each_partition(p, j, &mut |r| {
        let size: u32 = r.iter().sum();
        if size > n {
            return;
        }
        // n!/((n-|r|)! Π r_λ!) is a multinomial coefficient, hence integral
        let mut coeff: i128 = (0..size).map(|i| i128::from(n - i)).product();
        for &rl in r {
            coeff /= (1..=i128::from(rl)).product::<i128>();
        }
        let mono: i128 = r
            .iter()
            .zip(c)
            .map(|(&rl, &cl)| i128::from(cl).pow(rl))
            .product();
        total += coeff * mono;
    });
    Ok(total)
}

/// Coefficient of `x^j` in `(1 + Σ C_λ x^λ)^n` by repeated polynomial
/// multiplication; the brute-force oracle.
pub fn polynomial_power_coefficient(c: &[i64], n: u32, j: u32) -> i128 {
    let mut base = vec![0i128; c.len() + 2];
    base[0] = 1;
    for (i, &cl) in c.iter().enumerate() {
        base[i + 2] = i128::from(cl);
    }
    let mut acc = vec![1i128];
    for _ in 0..n {
        let mut next = vec![0i128; acc.len() + base.len() - 1];
        for (a, &x) in acc.iter().enumerate() {
            for (b, &y) in base.iter().enumerate() {
                next[a + b] += x * y;
            }
        }
        acc = next;
    }
    acc.get(j as usize).copied().unwrap_or(0)
}
