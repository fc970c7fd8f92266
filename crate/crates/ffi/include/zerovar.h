#ifndef ZEROVAR_H
#define ZEROVAR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum ZvStatus {
  ZV_STATUS_OK = 0,
  // A required pointer argument was null.
  ZV_STATUS_NULL_POINTER = 1,
  // A string argument was not valid UTF-8.
  ZV_STATUS_INVALID_UTF8 = 2,
  // Argument outside the mathematical domain.
  ZV_STATUS_DOMAIN = 3,
  // Quadrature or iteration missed its tolerance.
  ZV_STATUS_NUMERICAL = 4,
  // Operation not defined for this input.
  ZV_STATUS_UNSUPPORTED = 5,
  // Monte Carlo rejected too many samples.
  ZV_STATUS_REJECTION = 6,
  // Invalid configuration (unknown test form, bad quadrature spec).
  ZV_STATUS_CONFIG = 7,
  // Internal panic caught at the boundary.
  ZV_STATUS_PANIC = 8,
} ZvStatus;

// Opaque test-form handle.
typedef struct ZvTestForm ZvTestForm;

// Quadrature controls of the exact route.
typedef struct ZvQuadratureSpec {
  uint32_t outer_nodes;
  uint32_t inner_radial;
  uint32_t inner_angular;
  double cutoff_b;
  double rel_tol;
} ZvQuadratureSpec;

// A variance value from the exact route.
typedef struct ZvVarianceResult {
  double value;
  double error_estimate;
  uint32_t k;
} ZvVarianceResult;

// Two-term asymptotic coefficients and the integrals they are built from.
typedef struct ZvCoefficients {
  double a0;
  double a1;
  double i_ff;
  double i_rff;
  double i_dbarf;
} ZvCoefficients;

// Monte Carlo estimate of the mean and variance of a linear statistic.
typedef struct ZvMcEstimate {
  double mean;
  double variance;
  double stderr_mean;
  double stderr_variance;
  uint64_t n_samples;
  uint64_t seed;
  uint64_t n_rejected;
} ZvMcEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *zv_version(void);

// Message of the last failing call on this thread, or null if none.
// The pointer stays valid until the next failing call on the same thread.
const char *zv_last_error_message(void);

// Default quadrature controls.
struct ZvQuadratureSpec zv_quadrature_spec_default(void);

// Creates a test form by library name (`psi1`, `psi2`, `quadrupole`,
// `bump`, `const`).
//
// # Safety
// `name` must be null or a NUL-terminated string; `out` must be null or
// valid for writes.
enum ZvStatus zv_testform_new(const char *name, struct ZvTestForm **out);

// Releases a handle from [`zv_testform_new`]. Null is a no-op.
//
// # Safety
// `tf` must be null or a live handle not yet freed.
void zv_testform_free(struct ZvTestForm *tf);

// Riemann zeta `ζ(s)` for real `s > 1`.
//
// # Safety
// `out` must be null or valid for writes.
enum ZvStatus zv_riemann_zeta(double s, double *out);

// `G(t) = (1/4π²) Σ tⁿ/n²` for `t ∈ [-1, 1]` at the default tolerance.
//
// # Safety
// `out` must be null or valid for writes.
enum ZvStatus zv_g_function(double t, double *out);

// Normalized kernel `P_k(z, w) = cos^k d(z, w)` for affine points
// `z = z_re + i z_im`, `w = w_re + i w_im`.
//
// # Safety
// `out` must be null or valid for writes.
enum ZvStatus zv_normalized_kernel(double z_re,
                                   double z_im,
                                   double w_re,
                                   double w_im,
                                   uint32_t k,
                                   double *out);

// Exact-route variance of the test form at degree `k`. `spec` may be null
// for the defaults.
//
// # Safety
// `tf` must be a live handle; `spec` null or valid for reads; `out` null or
// valid for writes.
enum ZvStatus zv_exact_variance(const struct ZvTestForm *tf,
                                uint32_t k,
                                const struct ZvQuadratureSpec *spec,
                                struct ZvVarianceResult *out);

// Zonal-series variance; `ZV_STATUS_UNSUPPORTED` unless the form is a
// spherical harmonic.
//
// # Safety
// `tf` must be a live handle; `out` null or valid for writes.
enum ZvStatus zv_zonal_variance(const struct ZvTestForm *tf, uint32_t k, double *out);

// Two-term asymptotic coefficients `A0`, `A1` on the Riemann sphere.
//
// # Safety
// `tf` must be a live handle; `out` null or valid for writes.
enum ZvStatus zv_asymptotic_coefficients(const struct ZvTestForm *tf, struct ZvCoefficients *out);

// Monte Carlo variance over `n_samples` sections with the given seed.
//
// # Safety
// `tf` must be a live handle; `out` null or valid for writes.
enum ZvStatus zv_mc_variance(const struct ZvTestForm *tf,
                             uint32_t k,
                             uint64_t n_samples,
                             uint64_t seed,
                             struct ZvMcEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZEROVAR_H */
