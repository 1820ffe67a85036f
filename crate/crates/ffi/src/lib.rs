//! C ABI for `tubesolve`.
//!
//! Objects cross the boundary as opaque handles created by `ts_*_new`/`ts_*_from_*`
//! and released with the matching `ts_*_free`. Every fallible call returns a
//! [`TsStatus`]; on failure the message is available from
//! [`ts_last_error_message`] on the same thread. Buffers are caller-owned: a
//! call that fills a buffer reports the required size (including the trailing
//! NUL for strings) and returns `TS_STATUS_BUFFER_TOO_SMALL` if it does not fit.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use tubesolve::config::RunConfig;
use tubesolve::linear_bvp::solve_linear;
use tubesolve::nabla::nabla_exp;
use tubesolve::tube::{default_n_dirs, verify_tube, DEFAULT_TOL};
use tubesolve::{Error, FiniteTimeScale, GridFunction, SolverReport, TimeScaleSpec};

/// Result codes shared by every function of the C API.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    Regressivity = 4,
    BufferTooSmall = 5,
    /// The solver stopped without meeting its tolerances; the solution handle is still produced.
    NotConverged = 6,
    /// At least one tube condition failed; the report is still written.
    CertificateFailed = 7,
    Panic = 8,
}

/// A realized time scale.
pub struct TsScale {
    inner: Arc<FiniteTimeScale>,
}

/// A validated problem, tube and solver configuration.
pub struct TsRun {
    inner: tubesolve::config::Run,
}

/// Solver output: the trajectory and its report.
pub struct TsSolution {
    x: GridFunction,
    report: SolverReport,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: TsStatus, msg: impl Into<String>) -> TsStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> TsStatus {
    let status = match e {
        Error::Regressivity { .. } | Error::RegressivityScalar { .. } => TsStatus::Regressivity,
        _ => TsStatus::InvalidInput,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> TsStatus) -> TsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(TsStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(s: *const c_char) -> Result<&'a str, TsStatus> {
    if s.is_null() {
        return Err(fail(TsStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(TsStatus::InvalidUtf8, "argument is not valid UTF-8"))
}

/// Copies `src` into a caller buffer of `len` doubles.
unsafe fn write_doubles(src: &[f64], out: *mut f64, len: usize) -> TsStatus {
    if out.is_null() {
        return fail(TsStatus::NullPointer, "null output buffer");
    }
    if len < src.len() {
        return fail(
            TsStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} required", src.len()),
        );
    }
    std::ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    TsStatus::Ok
}

/// Copies `s` plus a NUL terminator into `buf`; `*written` receives the size needed.
unsafe fn write_string(s: &str, buf: *mut c_char, len: usize, written: *mut usize) -> TsStatus {
    let needed = s.len() + 1;
    if !written.is_null() {
        *written = needed;
    }
    if buf.is_null() || len < needed {
        return fail(
            TsStatus::BufferTooSmall,
            format!("buffer holds {len} bytes, {needed} required"),
        );
    }
    std::ptr::copy_nonoverlapping(s.as_ptr() as *const c_char, buf, s.len());
    *buf.add(s.len()) = 0;
    TsStatus::Ok
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to fit) and returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn ts_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ts_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Builds a time scale from its JSON description
/// (`{"components":[{"point":x} | {"interval":{"lo":..,"hi":..,"step":..}}]}`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_scale_from_json(
    json: *const c_char,
    out: *mut *mut TsScale,
) -> TsStatus {
    guard(|| {
        if out.is_null() {
            return fail(TsStatus::NullPointer, "null output handle");
        }
        let text = match str_arg(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let spec: TimeScaleSpec = match serde_json::from_str(text) {
            Ok(s) => s,
            Err(e) => return fail(TsStatus::InvalidInput, e.to_string()),
        };
        match spec.build() {
            Ok(ts) => {
                *out = Box::into_raw(Box::new(TsScale {
                    inner: Arc::new(ts),
                }));
                TsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Builds a time scale from `len` strictly increasing points.
///
/// # Safety
/// `points` must be valid for `len` doubles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_scale_from_points(
    points: *const f64,
    len: usize,
    out: *mut *mut TsScale,
) -> TsStatus {
    guard(|| {
        if points.is_null() || out.is_null() {
            return fail(TsStatus::NullPointer, "null argument");
        }
        let pts = std::slice::from_raw_parts(points, len).to_vec();
        match FiniteTimeScale::from_points(pts) {
            Ok(ts) => {
                *out = Box::into_raw(Box::new(TsScale {
                    inner: Arc::new(ts),
                }));
                TsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of grid points, 0 for a null handle.
///
/// # Safety
/// `scale` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ts_scale_len(scale: *const TsScale) -> usize {
    scale.as_ref().map_or(0, |s| s.inner.len())
}

/// Copies the grid points into `out` (capacity `len`).
///
/// # Safety
/// `scale` must be a live handle; `out` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ts_scale_points(
    scale: *const TsScale,
    out: *mut f64,
    len: usize,
) -> TsStatus {
    guard(|| match scale.as_ref() {
        Some(s) => write_doubles(s.inner.points(), out, len),
        None => fail(TsStatus::NullPointer, "null scale"),
    })
}

/// # Safety
/// `scale` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ts_scale_free(scale: *mut TsScale) {
    if !scale.is_null() {
        drop(Box::from_raw(scale));
    }
}

/// Nabla exponential `e_eps(t_i, t_{t0_index})` for every grid point.
///
/// # Safety
/// `scale` must be a live handle; `out` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ts_nabla_exp(
    scale: *const TsScale,
    eps: f64,
    t0_index: usize,
    out: *mut f64,
    len: usize,
) -> TsStatus {
    guard(|| {
        let Some(s) = scale.as_ref() else {
            return fail(TsStatus::NullPointer, "null scale");
        };
        match nabla_exp(&s.inner, eps, t0_index) {
            Ok(e) => write_doubles(e.values(), out, len),
            Err(e) => from_error(e),
        }
    })
}

/// Periodic solution of `x^nabla - x = g`. `g` and `out` are row-major
/// `N x dim` arrays (`N` grid points).
///
/// # Safety
/// `scale` must be a live handle; `g` valid for `N*dim` doubles, `out` for `len`.
#[no_mangle]
pub unsafe extern "C" fn ts_solve_linear(
    scale: *const TsScale,
    dim: usize,
    g: *const f64,
    out: *mut f64,
    len: usize,
) -> TsStatus {
    guard(|| {
        let Some(s) = scale.as_ref() else {
            return fail(TsStatus::NullPointer, "null scale");
        };
        if g.is_null() {
            return fail(TsStatus::NullPointer, "null forcing");
        }
        let n = s.inner.len() * dim;
        let values = std::slice::from_raw_parts(g, n).to_vec();
        let g = match GridFunction::new(s.inner.clone(), dim, values) {
            Ok(g) => g,
            Err(e) => return from_error(e),
        };
        match solve_linear(&s.inner, &g) {
            Ok(x) => write_doubles(x.values(), out, len),
            Err(e) => from_error(e),
        }
    })
}

/// Validates a run configuration (the JSON accepted by `tubesolve solve`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_run_from_json(json: *const c_char, out: *mut *mut TsRun) -> TsStatus {
    guard(|| {
        if out.is_null() {
            return fail(TsStatus::NullPointer, "null output handle");
        }
        let text = match str_arg(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match RunConfig::from_json(text).and_then(|c| c.build()) {
            Ok(run) => {
                *out = Box::into_raw(Box::new(TsRun { inner: run }));
                TsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Problem dimension, 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ts_run_dim(run: *const TsRun) -> usize {
    run.as_ref().map_or(0, |r| r.inner.problem.dim())
}

/// Number of grid points of the run's time scale, 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ts_run_len(run: *const TsRun) -> usize {
    run.as_ref().map_or(0, |r| r.inner.problem.scale().len())
}

/// # Safety
/// `run` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ts_run_free(run: *mut TsRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Runs the solver. `*out` receives a solution handle on `TS_STATUS_OK` and
/// on `TS_STATUS_NOT_CONVERGED`.
///
/// # Safety
/// `run` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ts_run_solve(run: *const TsRun, out: *mut *mut TsSolution) -> TsStatus {
    guard(|| {
        let Some(r) = run.as_ref() else {
            return fail(TsStatus::NullPointer, "null run");
        };
        if out.is_null() {
            return fail(TsStatus::NullPointer, "null output handle");
        }
        let run = &r.inner;
        match tubesolve::solve(&run.problem, &run.tube, &run.solver) {
            Ok((x, report)) => {
                let converged = report.converged;
                *out = Box::into_raw(Box::new(TsSolution { x, report }));
                if converged {
                    TsStatus::Ok
                } else {
                    fail(TsStatus::NotConverged, "solver did not converge")
                }
            }
            Err(e) => from_error(e),
        }
    })
}

/// Checks the tube conditions and writes the JSON certificate into `buf`.
/// `n_dirs = 0` and `tol <= 0` select the defaults.
///
/// # Safety
/// `run` must be a live handle; `buf` valid for `len` bytes; `written` null or valid.
#[no_mangle]
pub unsafe extern "C" fn ts_run_verify_tube(
    run: *const TsRun,
    n_dirs: usize,
    tol: f64,
    buf: *mut c_char,
    len: usize,
    written: *mut usize,
) -> TsStatus {
    guard(|| {
        let Some(r) = run.as_ref() else {
            return fail(TsStatus::NullPointer, "null run");
        };
        let run = &r.inner;
        let n_dirs = if n_dirs == 0 {
            default_n_dirs(run.problem.dim())
        } else {
            n_dirs
        };
        let tol = if tol > 0.0 { tol } else { DEFAULT_TOL };
        let report = match verify_tube(&run.problem, &run.tube, n_dirs, tol) {
            Ok(r) => r,
            Err(e) => return from_error(e),
        };
        let json = serde_json::to_string(&report).expect("report serializes");
        match write_string(&json, buf, len, written) {
            TsStatus::Ok if !report.passed => {
                fail(TsStatus::CertificateFailed, "tube certificate failed")
            }
            status => status,
        }
    })
}

/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ts_solution_converged(sol: *const TsSolution) -> bool {
    sol.as_ref().is_some_and(|s| s.report.converged)
}

/// Copies the trajectory (row-major `N x dim`) into `out`.
///
/// # Safety
/// `sol` must be a live handle; `out` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ts_solution_values(
    sol: *const TsSolution,
    out: *mut f64,
    len: usize,
) -> TsStatus {
    guard(|| match sol.as_ref() {
        Some(s) => write_doubles(s.x.values(), out, len),
        None => fail(TsStatus::NullPointer, "null solution"),
    })
}

/// Writes the solver report as JSON into `buf`.
///
/// # Safety
/// `sol` must be a live handle; `buf` valid for `len` bytes; `written` null or valid.
#[no_mangle]
pub unsafe extern "C" fn ts_solution_report_json(
    sol: *const TsSolution,
    full_history: bool,
    buf: *mut c_char,
    len: usize,
    written: *mut usize,
) -> TsStatus {
    guard(|| match sol.as_ref() {
        Some(s) => {
            let json =
                serde_json::to_string(&s.report.to_json(full_history)).expect("report serializes");
            write_string(&json, buf, len, written)
        }
        None => fail(TsStatus::NullPointer, "null solution"),
    })
}

/// # Safety
/// `sol` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ts_solution_free(sol: *mut TsSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}
