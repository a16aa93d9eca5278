//! C ABI over `releq`.
//!
//! Handles are opaque and owned by the caller, who releases them with the
//! matching `*_free` function. Every fallible call returns a [`ReleqStatus`];
//! on failure [`releq_last_error`] yields a message for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nalgebra::DVector;
use releq::branch::{continue_branch, find_seed, Branch};
use releq::catalog::Params;
use releq::config::Config;
use releq::error::Error;
use releq::numerics::Numerics;
use releq::problem::Problem;
use releq::stability::{branch_stability, Stability};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReleqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ConfigError = 3,
    BufferTooSmall = 4,
    IndexOutOfRange = 5,
    Panic = 6,
    DimensionMismatch = 10,
    InvalidAlgebra = 11,
    NotInTorus = 12,
    MetricDegenerate = 13,
    LeftChart = 14,
    GeoTolerance = 15,
    NonFinite = 16,
    InvalidSystem = 17,
    SymmetricPoint = 18,
    IsotropyNotInTorus = 19,
    InZMu = 20,
    SingularInertia = 21,
    TrivialIsotropyFailed = 22,
    NotInSlice = 23,
    InvalidFamily = 24,
    NewtonDiverged = 25,
    DeltaDegenerate = 26,
    StepFailed = 27,
    NonAbelian = 28,
    UnknownSystem = 29,
    BadParams = 30,
}

/// Stability class of a branch point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReleqStability {
    PositiveDefinite = 0,
    NegativeDefinite = 1,
    Indefinite = 2,
    Degenerate = 3,
    NotComputed = 4,
}

/// Per-point vector fields of a branch.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReleqField {
    U = 0,
    Mu1 = 1,
    Mu2 = 2,
    Q = 3,
    Zeta = 4,
    Beta = 5,
}

/// A catalog system with its symmetry analysis, slice and momentum family.
pub struct ReleqProblem {
    inner: Problem,
}

/// A continued branch of relative equilibria.
pub struct ReleqBranch {
    inner: Branch,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ReleqStatus {
    match e {
        Error::DimensionMismatch { .. } => ReleqStatus::DimensionMismatch,
        Error::InvalidAlgebra(_) => ReleqStatus::InvalidAlgebra,
        Error::NotInTorus(_) => ReleqStatus::NotInTorus,
        Error::MetricDegenerate(_) => ReleqStatus::MetricDegenerate,
        Error::LeftChart(_) => ReleqStatus::LeftChart,
        Error::GeoTolerance(_) => ReleqStatus::GeoTolerance,
        Error::NonFinite(_) => ReleqStatus::NonFinite,
        Error::InvalidSystem(_) => ReleqStatus::InvalidSystem,
        Error::SymmetricPoint(_) => ReleqStatus::SymmetricPoint,
        Error::IsotropyNotInTorus(_) => ReleqStatus::IsotropyNotInTorus,
        Error::InZMu(_) => ReleqStatus::InZMu,
        Error::SingularInertia(_) => ReleqStatus::SingularInertia,
        Error::TrivialIsotropyFailed => ReleqStatus::TrivialIsotropyFailed,
        Error::NotInSlice(_) => ReleqStatus::NotInSlice,
        Error::InvalidFamily(_) => ReleqStatus::InvalidFamily,
        Error::NewtonDiverged(_) => ReleqStatus::NewtonDiverged,
        Error::DeltaDegenerate(_) => ReleqStatus::DeltaDegenerate,
        Error::StepFailed(_) => ReleqStatus::StepFailed,
        Error::NonAbelian => ReleqStatus::NonAbelian,
        Error::UnknownSystem(_) => ReleqStatus::UnknownSystem,
        Error::BadParams(_) => ReleqStatus::BadParams,
    }
}

struct Fail(ReleqStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), format!("{}: {e}", e.name()))
    }
}

/// Runs `f`, records any failure and converts panics into `Panic`.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ReleqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            ReleqStatus::Ok
        }
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".to_string());
            ReleqStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(ReleqStatus::NullPointer, format!("{what} is NULL")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(ReleqStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail(ReleqStatus::NullPointer, format!("{what} is NULL")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn copy_out(src: &[f64], out: *mut f64, cap: usize, written: *mut usize) -> Result<(), Fail> {
    if !written.is_null() {
        *written = src.len();
    }
    if src.is_empty() {
        return Ok(());
    }
    if out.is_null() {
        return Err(Fail(ReleqStatus::NullPointer, "output buffer is NULL".into()));
    }
    if cap < src.len() {
        return Err(Fail(ReleqStatus::BufferTooSmall, format!("need {} entries, buffer holds {cap}", src.len())));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

unsafe fn problem_ref<'a>(p: *const ReleqProblem) -> Result<&'a ReleqProblem, Fail> {
    p.as_ref().ok_or_else(|| Fail(ReleqStatus::NullPointer, "problem handle is NULL".into()))
}

unsafe fn branch_ref<'a>(b: *const ReleqBranch) -> Result<&'a ReleqBranch, Fail> {
    b.as_ref().ok_or_else(|| Fail(ReleqStatus::NullPointer, "branch handle is NULL".into()))
}

fn into_handle<T>(v: T, out: *mut *mut T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(ReleqStatus::NullPointer, "output handle pointer is NULL".into()));
    }
    // SAFETY: checked non-null; the caller provides writable storage.
    unsafe { *out = Box::into_raw(Box::new(v)) };
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn releq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Free the result
/// with [`releq_string_free`].
#[no_mangle]
pub extern "C" fn releq_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn releq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a catalog system with default parameters, numerics and
/// bifurcation inputs.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn releq_problem_from_catalog(name: *const c_char, out: *mut *mut ReleqProblem) -> ReleqStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let p = Problem::catalog(name, &Params::new(), Numerics::default())?;
        into_handle(ReleqProblem { inner: p }, out)
    })
}

/// Builds a problem from a JSON configuration document (same schema as the
/// command-line tool), using the first entry of the μ₁ grid.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn releq_problem_from_config_json(json: *const c_char, out: *mut *mut ReleqProblem) -> ReleqStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let cfg = Config::parse(text).map_err(|e| Fail(ReleqStatus::ConfigError, e.to_string()))?;
        let sys = cfg.build_system()?;
        let bif = cfg.bifurcation_inputs()?;
        let mu1 = bif.mu1_grid[0].clone();
        into_handle(ReleqProblem { inner: Problem::new(sys, bif, &mu1)? }, out)
    })
}

/// # Safety
/// `p` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn releq_problem_free(p: *mut ReleqProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Chart dimension, dim 𝔤, slice dimension and dim k₂. Any output pointer
/// may be NULL.
///
/// # Safety
/// `p` must be a live handle; non-NULL outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn releq_problem_dims(
    p: *const ReleqProblem,
    n: *mut usize,
    dim_g: *mut usize,
    dim_u: *mut usize,
    dim_k2: *mut usize,
) -> ReleqStatus {
    guard(|| {
        let p = &problem_ref(p)?.inner;
        for (dst, v) in [(n, p.sys.n()), (dim_g, p.analysis.dim_g()), (dim_u, p.slice.dim_u), (dim_k2, p.analysis.k2.len())] {
            if !dst.is_null() {
                *dst = v;
            }
        }
        Ok(())
    })
}

/// Replaces μ₁ (length dim 𝔤); the slice is rebuilt.
///
/// # Safety
/// `p` must be a live handle; `mu1` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn releq_problem_set_mu1(p: *mut ReleqProblem, mu1: *const f64, len: usize) -> ReleqStatus {
    guard(|| {
        let h = p.as_mut().ok_or_else(|| Fail(ReleqStatus::NullPointer, "problem handle is NULL".into()))?;
        let mu1 = slice_arg(mu1, len, "mu1")?;
        h.inner = h.inner.with_mu1(mu1)?;
        Ok(())
    })
}

fn guess_vector(p: &Problem, guess: &[f64]) -> Result<DVector<f64>, Fail> {
    if guess.is_empty() {
        return Ok(p.default_guess());
    }
    if guess.len() != p.slice.dim_u {
        return Err(Error::DimensionMismatch { expected: p.slice.dim_u, got: guess.len() }.into());
    }
    Ok(DVector::from_column_slice(guess))
}

/// Newton seed search at τ = 0. A zero-length guess selects the default
/// start. Writes u⁰ (dim_u entries) and det Δ.
///
/// # Safety
/// `p` must be a live handle; `guess` must point to `guess_len` doubles;
/// `u_out` must hold `u_cap` doubles; `u_len` and `det_delta` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn releq_find_seed(
    p: *const ReleqProblem,
    guess: *const f64,
    guess_len: usize,
    u_out: *mut f64,
    u_cap: usize,
    u_len: *mut usize,
    det_delta: *mut f64,
) -> ReleqStatus {
    guard(|| {
        let p = &problem_ref(p)?.inner;
        let g = guess_vector(p, slice_arg(guess, guess_len, "guess")?)?;
        let seed = find_seed(&p.blowup(), &p.fam, &g)?;
        copy_out(seed.u.as_slice(), u_out, u_cap, u_len)?;
        if !det_delta.is_null() {
            *det_delta = seed.delta.det;
        }
        Ok(())
    })
}

/// Seed search followed by continuation to `tau_max` in `n_steps` steps.
///
/// # Safety
/// `p` must be a live handle; `guess` must point to `guess_len` doubles;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn releq_branch_compute(
    p: *const ReleqProblem,
    guess: *const f64,
    guess_len: usize,
    tau_max: f64,
    n_steps: usize,
    out: *mut *mut ReleqBranch,
) -> ReleqStatus {
    guard(|| {
        let p = &problem_ref(p)?.inner;
        let g = guess_vector(p, slice_arg(guess, guess_len, "guess")?)?;
        let b = p.blowup();
        let seed = find_seed(&b, &p.fam, &g)?;
        into_handle(ReleqBranch { inner: continue_branch(&b, &seed, tau_max, n_steps)? }, out)
    })
}

/// # Safety
/// `b` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn releq_branch_free(b: *mut ReleqBranch) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Number of points, or 0 for a NULL handle.
///
/// # Safety
/// `b` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn releq_branch_len(b: *const ReleqBranch) -> usize {
    b.as_ref().map_or(0, |b| b.inner.points.len())
}

/// τ, residuals and stability of point `index`. Any output may be NULL.
///
/// # Safety
/// `b` must be a live handle; non-NULL outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn releq_branch_point(
    b: *const ReleqBranch,
    index: usize,
    tau: *mut f64,
    res_f: *mut f64,
    res_g: *mut f64,
    stability: *mut ReleqStability,
) -> ReleqStatus {
    guard(|| {
        let b = &branch_ref(b)?.inner;
        let pt = b
            .points
            .get(index)
            .ok_or_else(|| Fail(ReleqStatus::IndexOutOfRange, format!("point {index} of {}", b.points.len())))?;
        for (dst, v) in [(tau, pt.tau), (res_f, pt.res_f), (res_g, pt.res_g)] {
            if !dst.is_null() {
                *dst = v;
            }
        }
        if !stability.is_null() {
            *stability = match pt.stability {
                Stability::PositiveDefinite => ReleqStability::PositiveDefinite,
                Stability::NegativeDefinite => ReleqStability::NegativeDefinite,
                Stability::Indefinite => ReleqStability::Indefinite,
                Stability::Degenerate => ReleqStability::Degenerate,
                Stability::NotComputed => ReleqStability::NotComputed,
            };
        }
        Ok(())
    })
}

/// Copies one vector field of point `index` into `out`; `len` receives the
/// field length even when the buffer is too small.
///
/// # Safety
/// `b` must be a live handle; `out` must hold `cap` doubles; `len` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn releq_branch_field(
    b: *const ReleqBranch,
    index: usize,
    field: ReleqField,
    out: *mut f64,
    cap: usize,
    len: *mut usize,
) -> ReleqStatus {
    guard(|| {
        let b = &branch_ref(b)?.inner;
        let pt = b
            .points
            .get(index)
            .ok_or_else(|| Fail(ReleqStatus::IndexOutOfRange, format!("point {index} of {}", b.points.len())))?;
        let v = match field {
            ReleqField::U => pt.u.as_slice(),
            ReleqField::Mu1 => pt.mu1.0.as_slice(),
            ReleqField::Mu2 => pt.mu2.0.as_slice(),
            ReleqField::Q => pt.q.as_slice(),
            ReleqField::Zeta => pt.zeta.0.as_slice(),
            ReleqField::Beta => pt.beta.0.as_slice(),
        };
        copy_out(v, out, cap, len)
    })
}

/// Classifies every point; fails with `NonAbelian` for nonabelian groups.
///
/// # Safety
/// `p` must be the live handle the branch was computed from; `b` a live handle.
#[no_mangle]
pub unsafe extern "C" fn releq_branch_classify(p: *const ReleqProblem, b: *mut ReleqBranch) -> ReleqStatus {
    guard(|| {
        let p = &problem_ref(p)?.inner;
        let b = b.as_mut().ok_or_else(|| Fail(ReleqStatus::NullPointer, "branch handle is NULL".into()))?;
        branch_stability(&p.blowup(), &mut b.inner)?;
        Ok(())
    })
}

/// Branch as CSV text; free with [`releq_string_free`]. NULL on failure.
///
/// # Safety
/// `b` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn releq_branch_to_csv(b: *const ReleqBranch) -> *mut c_char {
    let mut out = ptr::null_mut();
    guard(|| {
        let b = &branch_ref(b)?.inner;
        out = CString::new(b.to_csv()).map_err(|_| Fail(ReleqStatus::Panic, "CSV contains NUL".into()))?.into_raw();
        Ok(())
    });
    out
}
