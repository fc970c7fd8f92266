//! C ABI for `zerovar`.
//!
//! Conventions:
//!
//! * every fallible function returns a [`ZvStatus`] and writes its result
//!   through an out-pointer only on success;
//! * on failure, [`zv_last_error_message`] returns a description that stays
//!   valid until the next failing call on the same thread;
//! * test forms are opaque [`ZvTestForm`] handles created by
//!   [`zv_testform_new`] and released with [`zv_testform_free`];
//! * no panic crosses the boundary: it is caught and reported as
//!   `ZV_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;
use zerovar::geometry::{ProjectivePoint, TestForm};
use zerovar::kernels::normalized_kernel;
use zerovar::montecarlo::mc_variance;
use zerovar::specfun::{g_function, riemann_zeta, SeriesTolerance};
use zerovar::variance::{
    asymptotic_coefficients, coefficient_integrals, exact_variance, zonal_variance_oracle, QuadratureSpec,
};
use zerovar::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZvStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Argument outside the mathematical domain.
    Domain = 3,
    /// Quadrature or iteration missed its tolerance.
    Numerical = 4,
    /// Operation not defined for this input.
    Unsupported = 5,
    /// Monte Carlo rejected too many samples.
    Rejection = 6,
    /// Invalid configuration (unknown test form, bad quadrature spec).
    Config = 7,
    /// Internal panic caught at the boundary.
    Panic = 8,
}

/// Opaque test-form handle.
pub struct ZvTestForm(TestForm);

/// Quadrature controls of the exact route.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZvQuadratureSpec {
    pub outer_nodes: u32,
    pub inner_radial: u32,
    pub inner_angular: u32,
    pub cutoff_b: f64,
    pub rel_tol: f64,
}

/// A variance value from the exact route.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZvVarianceResult {
    pub value: f64,
    pub error_estimate: f64,
    pub k: u32,
}

/// Two-term asymptotic coefficients and the integrals they are built from.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZvCoefficients {
    pub a0: f64,
    pub a1: f64,
    pub i_ff: f64,
    pub i_rff: f64,
    pub i_dbarf: f64,
}

/// Monte Carlo estimate of the mean and variance of a linear statistic.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZvMcEstimate {
    pub mean: f64,
    pub variance: f64,
    pub stderr_mean: f64,
    pub stderr_variance: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub n_rejected: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ZvStatus {
    match e {
        Error::Domain { .. } => ZvStatus::Domain,
        Error::Numerical { .. } => ZvStatus::Numerical,
        Error::Unsupported { .. } => ZvStatus::Unsupported,
        Error::Rejection { .. } => ZvStatus::Rejection,
        Error::Config(_) => ZvStatus::Config,
    }
}

/// Internal failure carried to the boundary.
enum Failure {
    Null(&'static str),
    Utf8,
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `body`, writing its value to `out` on success and translating every
/// failure (including panics) into a status and a last-error message.
fn guard<T>(out: *mut T, body: impl FnOnce() -> Result<T, Failure>) -> ZvStatus {
    if out.is_null() {
        set_last_error("output pointer is null".into());
        return ZvStatus::NullPointer;
    }
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(v)) => {
            // SAFETY: `out` is non-null and the caller promises it is valid for writes.
            unsafe { out.write(v) };
            ZvStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("{what} is null"));
            ZvStatus::NullPointer
        }
        Ok(Err(Failure::Utf8)) => {
            set_last_error("string argument is not valid UTF-8".into());
            ZvStatus::InvalidUtf8
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            ZvStatus::Panic
        }
    }
}

/// # Safety
/// `tf` must be null or a live handle from [`zv_testform_new`].
unsafe fn form<'a>(tf: *const ZvTestForm) -> Result<&'a TestForm, Failure> {
    tf.as_ref().map(|h| &h.0).ok_or(Failure::Null("test form handle"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn zv_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version string has no interior NUL"),
    };
    VERSION.as_ptr()
}

/// Message of the last failing call on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn zv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Default quadrature controls.
#[no_mangle]
pub extern "C" fn zv_quadrature_spec_default() -> ZvQuadratureSpec {
    let d = QuadratureSpec::default();
    ZvQuadratureSpec {
        outer_nodes: d.outer_nodes as u32,
        inner_radial: d.inner_radial as u32,
        inner_angular: d.inner_angular as u32,
        cutoff_b: d.cutoff_b,
        rel_tol: d.rel_tol,
    }
}

/// Creates a test form by library name (`psi1`, `psi2`, `quadrupole`,
/// `bump`, `const`).
///
/// # Safety
/// `name` must be null or a NUL-terminated string; `out` must be null or
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn zv_testform_new(name: *const c_char, out: *mut *mut ZvTestForm) -> ZvStatus {
    guard(out, || {
        if name.is_null() {
            return Err(Failure::Null("name"));
        }
        let name = CStr::from_ptr(name).to_str().map_err(|_| Failure::Utf8)?;
        let tf = TestForm::by_name(name)?;
        Ok(Box::into_raw(Box::new(ZvTestForm(tf))))
    })
}

/// Releases a handle from [`zv_testform_new`]. Null is a no-op.
///
/// # Safety
/// `tf` must be null or a live handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn zv_testform_free(tf: *mut ZvTestForm) {
    if !tf.is_null() {
        drop(Box::from_raw(tf));
    }
}

/// Riemann zeta `ζ(s)` for real `s > 1`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn zv_riemann_zeta(s: f64, out: *mut f64) -> ZvStatus {
    guard(out, || Ok(riemann_zeta(s)?))
}

/// `G(t) = (1/4π²) Σ tⁿ/n²` for `t ∈ [-1, 1]` at the default tolerance.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn zv_g_function(t: f64, out: *mut f64) -> ZvStatus {
    guard(out, || Ok(g_function(t, SeriesTolerance::default())?))
}

/// Normalized kernel `P_k(z, w) = cos^k d(z, w)` for affine points
/// `z = z_re + i z_im`, `w = w_re + i w_im`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn zv_normalized_kernel(
    z_re: f64,
    z_im: f64,
    w_re: f64,
    w_im: f64,
    k: u32,
    out: *mut f64,
) -> ZvStatus {
    guard(out, || {
        if !(z_re.is_finite() && z_im.is_finite() && w_re.is_finite() && w_im.is_finite()) {
            return Err(Error::Domain {
                op: "zv_normalized_kernel",
                detail: "affine coordinates must be finite".into(),
            }
            .into());
        }
        let z = ProjectivePoint::from_affine(Complex64::new(z_re, z_im));
        let w = ProjectivePoint::from_affine(Complex64::new(w_re, w_im));
        Ok(normalized_kernel(&z, &w, k))
    })
}

/// Exact-route variance of the test form at degree `k`. `spec` may be null
/// for the defaults.
///
/// # Safety
/// `tf` must be a live handle; `spec` null or valid for reads; `out` null or
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn zv_exact_variance(
    tf: *const ZvTestForm,
    k: u32,
    spec: *const ZvQuadratureSpec,
    out: *mut ZvVarianceResult,
) -> ZvStatus {
    guard(out, || {
        let tf = form(tf)?;
        let spec = match spec.as_ref() {
            None => QuadratureSpec::default(),
            Some(s) => QuadratureSpec {
                outer_nodes: s.outer_nodes as usize,
                inner_radial: s.inner_radial as usize,
                inner_angular: s.inner_angular as usize,
                cutoff_b: s.cutoff_b,
                rel_tol: s.rel_tol,
            },
        };
        spec.validate()?;
        let r = exact_variance(tf, k, &spec)?;
        Ok(ZvVarianceResult {
            value: r.value,
            error_estimate: r.error_estimate,
            k: r.k,
        })
    })
}

/// Zonal-series variance; `ZV_STATUS_UNSUPPORTED` unless the form is a
/// spherical harmonic.
///
/// # Safety
/// `tf` must be a live handle; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn zv_zonal_variance(tf: *const ZvTestForm, k: u32, out: *mut f64) -> ZvStatus {
    guard(out, || Ok(zonal_variance_oracle(form(tf)?, k)?))
}

/// Two-term asymptotic coefficients `A0`, `A1` on the Riemann sphere.
///
/// # Safety
/// `tf` must be a live handle; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn zv_asymptotic_coefficients(tf: *const ZvTestForm, out: *mut ZvCoefficients) -> ZvStatus {
    guard(out, || {
        let ints = coefficient_integrals(form(tf)?)?;
        let c = asymptotic_coefficients(1, &ints)?;
        Ok(ZvCoefficients {
            a0: c.a0,
            a1: c.a1,
            i_ff: ints.i_ff,
            i_rff: ints.i_rff,
            i_dbarf: ints.i_dbarf,
        })
    })
}

/// Monte Carlo variance over `n_samples` sections with the given seed.
///
/// # Safety
/// `tf` must be a live handle; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn zv_mc_variance(
    tf: *const ZvTestForm,
    k: u32,
    n_samples: u64,
    seed: u64,
    out: *mut ZvMcEstimate,
) -> ZvStatus {
    guard(out, || {
        let n = usize::try_from(n_samples).map_err(|_| Error::Config("n_samples too large".into()))?;
        let e = mc_variance(k, form(tf)?, n, seed)?;
        Ok(ZvMcEstimate {
            mean: e.mean,
            variance: e.variance,
            stderr_mean: e.stderr_mean,
            stderr_variance: e.stderr_variance,
            n_samples: e.n_samples as u64,
            seed: e.seed,
            n_rejected: e.n_rejected as u64,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_become_status_codes() {
        let mut x = 0.0f64;
        let status = guard(&mut x, || -> Result<f64, Failure> { panic!("boom") });
        assert_eq!(status, ZvStatus::Panic);
        let msg = unsafe { CStr::from_ptr(zv_last_error_message()) }.to_str().unwrap();
        assert!(msg.contains("boom"));
        assert_eq!(x, 0.0);
    }

    #[test]
    fn library_errors_map_to_distinct_codes() {
        let errors = [
            (Error::Config("x".into()), ZvStatus::Config),
            (
                Error::Rejection {
                    rejected: 1,
                    total: 2,
                    rate: 0.5,
                    limit: 1e-3,
                },
                ZvStatus::Rejection,
            ),
        ];
        for (e, want) in errors {
            assert_eq!(status_of(&e), want);
        }
    }

    #[test]
    fn default_spec_round_trips() {
        let d = zv_quadrature_spec_default();
        assert_eq!(d.outer_nodes as usize, QuadratureSpec::default().outer_nodes);
        assert_eq!(d.rel_tol, QuadratureSpec::default().rel_tol);
    }
}
