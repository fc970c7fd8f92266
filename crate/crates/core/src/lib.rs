//! Numerical laboratory for the variance of linear statistics of zeros of
//! Gaussian random holomorphic sections of `O(k)` over the Riemann sphere.
//!
//! The variance is computed three ways and cross-checked:
//!
//! * [`variance::exact_variance`]: the bipotential double integral of
//!   `Q_k(z, w) = G(P_k(z, w)^2)` against `f ⊗ f`;
//! * [`variance::asymptotic_coefficients`]: the two-term expansion
//!   `A0/k + A1/k^2` built from curvature and `f`;
//! * [`montecarlo::mc_variance`]: sampling the SU(2) ensemble and locating
//!   its zeros.
//!
//! Geometry follows the Fubini–Study normalization `ω = (i/2)∂∂̄ log(1+|z|²)`,
//! i.e. a round sphere of radius ½ and area π.

// Domain checks are written `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod montecarlo;
pub mod quadrature;
pub mod specfun;
pub mod variance;

pub use error::{Error, Result};
pub use geometry::{ProjectivePoint, Su2, TestForm};
pub use kernels::KernelValue;
pub use montecarlo::MCEstimate;
pub use variance::{QuadratureSpec, VarianceResult};

/// Version string embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
