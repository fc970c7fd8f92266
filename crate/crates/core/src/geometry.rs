//! The Riemann sphere `CP¹` with the Fubini–Study form
//! `ω = (i/2)∂∂̄ log(1+|z|²)`: a round sphere of radius ½, area π, constant
//! scalar curvature 2.
//!
//! Laplacian convention: `Δ` is the (non-positive) Laplace–Beltrami operator
//! of this metric and `i∂∂̄ψ = ½ Δψ · ω`, so the density `f` of `i∂∂̄ψ` is
//! `½ Δψ`. A degree-`l` spherical harmonic has `Δψ = -4l(l+1) ψ`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// A point of `CP¹`, stored as a unit vector `(h0, h1) ∈ C²`.
///
/// The affine coordinate is `z = h0/h1`; the conjugate chart uses `w = h1/h0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectivePoint {
    h0: Complex64,
    h1: Complex64,
}

/// Local coordinate of a point in whichever chart keeps it inside the unit disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Chart {
    /// `z = h0/h1`, used when `|h1| ≥ 1/√2`.
    Affine(Complex64),
    /// `w = h1/h0`, used otherwise.
    Conjugate(Complex64),
}

impl ProjectivePoint {
    /// Normalizes `(h0, h1)`. Fails on the zero vector or non-finite input.
    pub fn new(h0: Complex64, h1: Complex64) -> Result<Self> {
        let norm = h0.norm().hypot(h1.norm());
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::domain(
                "ProjectivePoint::new",
                format!("homogeneous coordinates ({h0}, {h1}) do not define a point"),
            ));
        }
        Ok(ProjectivePoint {
            h0: h0 / norm,
            h1: h1 / norm,
        })
    }

    /// Caller guarantees `|h0|² + |h1|² = 1` up to rounding.
    pub(crate) fn from_unit(h0: Complex64, h1: Complex64) -> Self {
        debug_assert!((h0.norm_sqr() + h1.norm_sqr() - 1.0).abs() < 1e-12);
        ProjectivePoint { h0, h1 }
    }

    /// `[z : 1]`.
    pub fn from_affine(z: Complex64) -> Self {
        let r = z.norm();
        if r > 1.0 {
            // [1 : 1/z] avoids overflow for huge |z|.
            Self::from_conjugate(z.inv())
        } else {
            let n = (1.0 + r * r).sqrt();
            ProjectivePoint {
                h0: z / n,
                h1: Complex64::new(1.0 / n, 0.0),
            }
        }
    }

    /// `[1 : w]`.
    pub fn from_conjugate(w: Complex64) -> Self {
        let r = w.norm();
        if r > 1.0 {
            Self::from_affine(w.inv())
        } else {
            let n = (1.0 + r * r).sqrt();
            ProjectivePoint {
                h0: Complex64::new(1.0 / n, 0.0),
                h1: w / n,
            }
        }
    }

    /// `[0 : 1]`, the origin of the affine chart. Expansions are centred here.
    pub fn origin() -> Self {
        ProjectivePoint {
            h0: Complex64::new(0.0, 0.0),
            h1: Complex64::new(1.0, 0.0),
        }
    }

    /// `[1 : 0]`, the point at infinity of the affine chart.
    pub fn infinity() -> Self {
        ProjectivePoint {
            h0: Complex64::new(1.0, 0.0),
            h1: Complex64::new(0.0, 0.0),
        }
    }

    pub fn h0(&self) -> Complex64 {
        self.h0
    }

    pub fn h1(&self) -> Complex64 {
        self.h1
    }

    /// Hermitian product `⟨p, q⟩ = h0 q̄0 + h1 q̄1` of the unit representatives.
    pub fn inner(&self, other: &ProjectivePoint) -> Complex64 {
        self.h0 * other.h0.conj() + self.h1 * other.h1.conj()
    }

    /// `|h0 q1 - h1 q0| = sin(dist)`.
    fn wedge(&self, other: &ProjectivePoint) -> f64 {
        (self.h0 * other.h1 - self.h1 * other.h0).norm()
    }

    /// Affine coordinate `h0/h1`, `None` at infinity.
    pub fn affine(&self) -> Option<Complex64> {
        (self.h1.norm_sqr() > 0.0).then(|| self.h0 / self.h1)
    }

    pub fn chart(&self) -> Chart {
        if self.h1.norm_sqr() >= 0.5 {
            Chart::Affine(self.h0 / self.h1)
        } else {
            Chart::Conjugate(self.h1 / self.h0)
        }
    }

    /// The antipodal point `[-h̄1 : h̄0]` (distance π/2).
    pub fn antipode(&self) -> Self {
        ProjectivePoint {
            h0: -self.h1.conj(),
            h1: self.h0.conj(),
        }
    }

    /// Height `|h1|² - |h0|² = (1-|z|²)/(1+|z|²) ∈ [-1, 1]`: the cosine of the
    /// polar angle on the unit sphere, +1 at the origin.
    pub fn height(&self) -> f64 {
        self.h1.norm_sqr() - self.h0.norm_sqr()
    }

    /// Point at geodesic distance `d` from `self`, in direction `beta` of the
    /// circle of such points. The map is the exponential chart at `self`.
    pub fn geodesic_offset(&self, d: f64, beta: f64) -> Self {
        let (s, c) = d.sin_cos();
        let phase = Complex64::from_polar(s, beta);
        let perp = self.antipode();
        ProjectivePoint {
            h0: self.h0 * c + perp.h0 * phase,
            h1: self.h1 * c + perp.h1 * phase,
        }
    }
}

impl fmt::Display for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} : {}]", self.h0, self.h1)
    }
}

/// An element `[[a, b], [-b̄, ā]]` of SU(2) acting on homogeneous coordinates.
/// These are exactly the isometries of the Fubini–Study sphere (mod ±1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su2 {
    a: Complex64,
    b: Complex64,
}

impl Su2 {
    pub fn identity() -> Self {
        Su2 {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
        }
    }

    /// Normalizes `(a, b)`.
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let n = a.norm().hypot(b.norm());
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::domain("Su2::new", "zero or non-finite quaternion"));
        }
        Ok(Su2 { a: a / n, b: b / n })
    }

    /// Rotation taking `p` to the origin `[0 : 1]`.
    pub fn to_origin(p: &ProjectivePoint) -> Self {
        Su2 { a: p.h1, b: -p.h0 }
    }

    pub fn apply(&self, p: &ProjectivePoint) -> ProjectivePoint {
        ProjectivePoint {
            h0: self.a * p.h0 + self.b * p.h1,
            h1: -self.b.conj() * p.h0 + self.a.conj() * p.h1,
        }
    }

    pub fn inverse(&self) -> Self {
        Su2 {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Su2) -> Self {
        Su2 {
            a: self.a * other.a - self.b * other.b.conj(),
            b: self.a * other.b + self.b * other.a.conj(),
        }
    }
}

/// Kähler potential of the Fubini–Study frame in the affine chart.
pub fn fs_potential(z: Complex64) -> f64 {
    z.norm_sqr().ln_1p()
}

/// Metric coefficient `g_{11̄}(z) = ∂²φ/∂z∂z̄ = (1+|z|²)^{-2}`; also the density
/// of `ω` against `dx dy`.
pub fn metric_density(z: Complex64) -> f64 {
    let s = 1.0 + z.norm_sqr();
    1.0 / (s * s)
}

/// Geodesic distance for `ω`: `arccos |⟨p, q⟩| ∈ [0, π/2]`, evaluated as
/// `atan2(sin, cos)` so that small distances keep full relative precision.
pub fn geodesic_distance(p: &ProjectivePoint, q: &ProjectivePoint) -> f64 {
    p.wedge(q).atan2(p.inner(q).norm())
}

/// Scalar curvature of `(CP¹, ω)`. The metric is homogeneous, so this is the
/// constant 2 (`R_{11̄11̄} = -∂⁴φ/∂z²∂z̄² = 2` at the origin, `g = 1` there).
pub fn scalar_curvature(_p: &ProjectivePoint) -> f64 {
    2.0
}

/// Kähler curvature tensor components `R[j, l̄, p, q̄]` at a point where the
/// metric is the identity, for a complex manifold of dimension `dim`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureData {
    pub dim: usize,
    /// Row-major in `(j, l, p, q)`.
    pub tensor: Vec<f64>,
    pub rho: f64,
}

impl CurvatureData {
    /// Builds the record and fills `rho = Σ_{j,p} R[j,j̄,p,p̄]`.
    pub fn from_tensor(dim: usize, tensor: Vec<f64>) -> Result<Self> {
        if dim == 0 || tensor.len() != dim.pow(4) {
            return Err(Error::domain(
                "CurvatureData::from_tensor",
                format!("need {} components for dim {dim}, got {}", dim.pow(4), tensor.len()),
            ));
        }
        let mut data = CurvatureData { dim, tensor, rho: 0.0 };
        data.rho = (0..dim)
            .flat_map(|j| (0..dim).map(move |p| (j, p)))
            .map(|(j, p)| data.get(j, j, p, p))
            .sum();
        Ok(data)
    }

    /// `CP^m` with the Fubini–Study form normalized as above:
    /// `R[j,l̄,p,q̄] = δ_jl δ_pq + δ_jq δ_pl`, `ρ = m(m+1)`.
    pub fn complex_projective(m: usize) -> Self {
        let mut t = vec![0.0; m.pow(4)];
        for j in 0..m {
            for l in 0..m {
                for p in 0..m {
                    for q in 0..m {
                        let v = f64::from(u8::from(j == l && p == q)) + f64::from(u8::from(j == q && p == l));
                        t[((j * m + l) * m + p) * m + q] = v;
                    }
                }
            }
        }
        Self::from_tensor(m, t).expect("size matches")
    }

    /// Curvature of `(CP¹, ω)` at `p` in normal coordinates there.
    pub fn at(p: &ProjectivePoint) -> Self {
        let r = scalar_curvature(p);
        Self::from_tensor(1, vec![r]).expect("size matches")
    }

    pub fn get(&self, j: usize, l: usize, p: usize, q: usize) -> f64 {
        let m = self.dim;
        self.tensor[((j * m + l) * m + p) * m + q]
    }

    /// `R(u, ū, u, ū) = Σ R[j,l̄,p,q̄] u^j ū^l u^p ū^q` (real for Hermitian `R`).
    pub fn quartic(&self, u: &[Complex64]) -> f64 {
        let m = self.dim;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..m {
            for l in 0..m {
                for p in 0..m {
                    for q in 0..m {
                        acc += self.get(j, l, p, q) * u[j] * u[l].conj() * u[p] * u[q].conj();
                    }
                }
            }
        }
        acc.re
    }

    /// Kähler symmetries `R[j,l̄,p,q̄] = R[p,l̄,j,q̄] = R[j,q̄,p,l̄]`, within `tol`.
    pub fn has_kahler_symmetries(&self, tol: f64) -> bool {
        let m = self.dim;
        (0..m).all(|j| {
            (0..m).all(|l| {
                (0..m).all(|p| {
                    (0..m).all(|q| {
                        let v = self.get(j, l, p, q);
                        (v - self.get(p, l, j, q)).abs() <= tol && (v - self.get(j, q, p, l)).abs() <= tol
                    })
                })
            })
        })
    }
}

/// Tensor-product rule over `CP¹`: each chart's closed unit disk, Gauss–Legendre
/// in the radius and the periodic trapezoid rule in the angle.
#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    pub points: Vec<ProjectivePoint>,
    pub weights: Vec<f64>,
}

impl SphereQuadrature {
    pub fn new(radial: usize, angular: usize) -> Self {
        let rule = GaussLegendre::new(radial.max(1));
        let angular = angular.max(1);
        let dtheta = 2.0 * PI / angular as f64;
        let mut points = Vec::with_capacity(2 * radial * angular);
        let mut weights = Vec::with_capacity(2 * radial * angular);
        for conjugate in [false, true] {
            for (r, wr) in rule.on_interval(0.0, 1.0) {
                let s = 1.0 + r * r;
                let w_area = wr * r / (s * s) * dtheta;
                for j in 0..angular {
                    // Offset the conjugate chart's angles so the two grids do
                    // not share the seam points.
                    let theta = (j as f64 + if conjugate { 0.5 } else { 0.0 }) * dtheta;
                    let c = Complex64::from_polar(r, theta);
                    let p = if conjugate {
                        ProjectivePoint::from_conjugate(c)
                    } else {
                        ProjectivePoint::from_affine(c)
                    };
                    points.push(p);
                    weights.push(w_area);
                }
            }
        }
        SphereQuadrature { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate<F: Fn(&ProjectivePoint) -> f64>(&self, f: F) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }
}

impl Default for SphereQuadrature {
    fn default() -> Self {
        SphereQuadrature::new(64, 128)
    }
}

/// Profile of a test function. Most are zonal about the origin, i.e. functions
/// of the height `x = (1-|z|²)/(1+|z|²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// `ψ = 1`, `f = 0`.
    Constant,
    /// `ψ = x`; degree-1 harmonic.
    Height,
    /// `ψ = Re[2z/(1+|z|²)] = 2 Re(h0 h̄1)`; degree-1 harmonic, not zonal about the origin.
    Equatorial,
    /// `ψ = (3x²-1)/2`; degree-2 harmonic.
    Quadrupole,
    /// `ψ = exp(a x)`; not an eigenfunction.
    Bump { steepness: f64 },
}

/// A smooth real test function `ψ` on `CP¹` with the density `f = ½Δψ` of
/// `i∂∂̄ψ` against `ω` in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct TestForm {
    name: String,
    shape: Shape,
    /// Pull-back applied before evaluating the profile: `ψ(p) = profile(rot·p)`.
    pullback: Su2,
}

impl TestForm {
    pub fn new(name: impl Into<String>, shape: Shape) -> Self {
        TestForm {
            name: name.into(),
            shape,
            pullback: Su2::identity(),
        }
    }

    /// Looks up a form of [`testform_library`] by name.
    pub fn by_name(name: &str) -> Result<Self> {
        testform_library()
            .into_iter()
            .find(|t| t.name == name)
            .ok_or_else(|| {
                let known: Vec<_> = testform_library().into_iter().map(|t| t.name).collect();
                Error::Config(format!("unknown test form '{name}' (known: {})", known.join(", ")))
            })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// `ψ ∘ R^{-1}`: the same form moved by the isometry `R`.
    pub fn rotated(&self, r: &Su2) -> Self {
        TestForm {
            name: format!("{}@rot", self.name),
            shape: self.shape,
            pullback: self.pullback.compose(&r.inverse()),
        }
    }

    pub fn psi(&self, p: &ProjectivePoint) -> f64 {
        let q = self.pullback.apply(p);
        let x = q.height();
        match self.shape {
            Shape::Constant => 1.0,
            Shape::Height => x,
            Shape::Equatorial => 2.0 * (q.h0 * q.h1.conj()).re,
            Shape::Quadrupole => 0.5 * (3.0 * x * x - 1.0),
            Shape::Bump { steepness: a } => (a * x).exp(),
        }
    }

    /// `f = *i∂∂̄ψ = ½Δψ`. For a zonal profile `g(x)`:
    /// `f = 2[(1-x²) g''(x) - 2x g'(x)]`.
    pub fn f(&self, p: &ProjectivePoint) -> f64 {
        match self.shape {
            Shape::Constant => 0.0,
            Shape::Height | Shape::Equatorial => -4.0 * self.psi(p),
            Shape::Quadrupole => -12.0 * self.psi(p),
            Shape::Bump { steepness: a } => {
                let x = self.pullback.apply(p).height();
                2.0 * (a * x).exp() * ((1.0 - x * x) * a * a - 2.0 * a * x)
            }
        }
    }

    /// `λ` with `Δψ = -λψ`, when `ψ` is a pure spherical harmonic.
    pub fn eigenvalue(&self) -> Option<f64> {
        self.harmonic_degree().map(|l| 4.0 * (l * (l + 1)) as f64)
    }

    /// Degree `l` of the spherical harmonic `ψ`, if it is one.
    pub fn harmonic_degree(&self) -> Option<usize> {
        match self.shape {
            Shape::Constant => Some(0),
            Shape::Height | Shape::Equatorial => Some(1),
            Shape::Quadrupole => Some(2),
            Shape::Bump { .. } => None,
        }
    }
}

/// Named test forms available to the CLI and the experiments.
pub fn testform_library() -> Vec<TestForm> {
    vec![
        TestForm::new("psi1", Shape::Height),
        TestForm::new("psi2", Shape::Equatorial),
        TestForm::new("quadrupole", Shape::Quadrupole),
        TestForm::new("bump", Shape::Bump { steepness: 2.0 }),
        TestForm::new("const", Shape::Constant),
    ]
}
