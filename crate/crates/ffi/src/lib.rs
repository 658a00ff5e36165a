//! C ABI over `vortexbc`.
//!
//! Every fallible call returns a [`VbcStatus`]; on failure the message is kept
//! per thread and read back with [`vbc_last_error`]. Handles are opaque and
//! released with their matching `_free` function. Complex arrays are
//! interleaved `re, im` pairs, so a length of `n` values means `2 n` doubles.

use num_complex::Complex64 as C64;
use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use vortexbc::grid::{RadialFunction, SpectralFunction};
use vortexbc::harness::{self, RunOutput, Scenario, Setup, Solver};
use vortexbc::stokes::pair;
use vortexbc::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VbcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Grid = 4,
    Misconfigured = 5,
    NonConvergence = 6,
    Parse = 7,
    Validation = 8,
    Io = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VbcSolver {
    Stokes = 0,
    Oseen = 1,
    Helmholtz = 2,
    Control = 3,
    Map = 4,
    Verify = 5,
}

impl From<VbcSolver> for Solver {
    fn from(s: VbcSolver) -> Solver {
        match s {
            VbcSolver::Stokes => Solver::Stokes,
            VbcSolver::Oseen => Solver::Oseen,
            VbcSolver::Helmholtz => Solver::Helmholtz,
            VbcSolver::Control => Solver::Control,
            VbcSolver::Map => Solver::Map,
            VbcSolver::Verify => Solver::Verify,
        }
    }
}

/// Scalar diagnostics of one emission time.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct VbcRecord {
    pub t: f64,
    /// Largest `|moment residual|` over `k = 0..=N`.
    pub max_manifold_residual: f64,
    /// Largest `|Robin residual|` over `k = 0..=N`.
    pub max_robin_residual: f64,
    pub circulation: f64,
    pub boundary_velocity_norm: f64,
}

/// Opaque validated scenario.
pub struct VbcScenario(Scenario);

/// Opaque transform bound to a scenario's grids.
pub struct VbcTransform(Setup);

/// Opaque in-memory run result.
pub struct VbcRun(RunOutput);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> VbcStatus {
    match e {
        Error::Domain(_) => VbcStatus::Domain,
        Error::Grid(_) => VbcStatus::Grid,
        Error::Misconfigured(_) => VbcStatus::Misconfigured,
        Error::NonConvergence(_) => VbcStatus::NonConvergence,
        Error::Parse(_) => VbcStatus::Parse,
        Error::Validation { .. } => VbcStatus::Validation,
        Error::Io(_) => VbcStatus::Io,
    }
}

enum Fail {
    Null,
    Arg(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> VbcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            VbcStatus::Ok
        }
        Ok(Err(Fail::Null)) => {
            set_error("null pointer argument".into());
            VbcStatus::NullPointer
        }
        Ok(Err(Fail::Arg(m))) => {
            set_error(m);
            VbcStatus::InvalidArgument
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            VbcStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null)
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null)
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null);
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Arg("string is not valid UTF-8".into()))
}

unsafe fn complex_in(p: *const f64, n: usize) -> Result<Vec<C64>, Fail> {
    if p.is_null() {
        return Err(Fail::Null);
    }
    let s = std::slice::from_raw_parts(p, 2 * n);
    Ok(s.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect())
}

unsafe fn complex_out(values: &[C64], p: *mut f64, n: usize) -> Result<(), Fail> {
    if p.is_null() {
        return Err(Fail::Null);
    }
    if n != values.len() {
        return Err(Fail::Arg(format!("output holds {n} values, need {}", values.len())));
    }
    let s = std::slice::from_raw_parts_mut(p, 2 * n);
    for (c, v) in s.chunks_exact_mut(2).zip(values) {
        c[0] = v.re;
        c[1] = v.im;
    }
    Ok(())
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated, truncated
/// to `len`). Returns the full message length excluding the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn vbc_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = e.len().min(len - 1);
            std::ptr::copy_nonoverlapping(e.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        e.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vbc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// `J_k(x)`.
///
/// # Safety
/// `result` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vbc_bessel_j(k: i32, x: f64, result: *mut f64) -> VbcStatus {
    guard(|| {
        *out(result)? = vortexbc::bessel::bessel_j(k, x);
        Ok(())
    })
}

/// `Y_k(x)`, `x > 0`.
///
/// # Safety
/// `result` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vbc_bessel_y(k: i32, x: f64, result: *mut f64) -> VbcStatus {
    guard(|| {
        *out(result)? = vortexbc::bessel::bessel_y(k, x)?;
        Ok(())
    })
}

/// Normalized kernel `R_{k,l}(lambda, r)` for a disc of radius `r0`.
///
/// # Safety
/// `result` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vbc_kernel_r(k: i32, l: i32, lambda: f64, r: f64, r0: f64, result: *mut f64) -> VbcStatus {
    guard(|| {
        *out(result)? = vortexbc::bessel::kernel_r(k, l, lambda, r, r0)?;
        Ok(())
    })
}

/// Boundary forcing kernel `rho_k(lambda)`.
///
/// # Safety
/// `result` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vbc_forcing_kernel_rho(k: i32, lambda: f64, r0: f64, result: *mut f64) -> VbcStatus {
    guard(|| {
        *out(result)? = vortexbc::bessel::forcing_kernel_rho(k, lambda, r0)?;
        Ok(())
    })
}

/// Reads and validates a scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `scenario` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vbc_scenario_load(path: *const c_char, scenario: *mut *mut VbcScenario) -> VbcStatus {
    guard(|| {
        let slot = out(scenario)?;
        let s = harness::load_scenario(Path::new(text(path)?))?;
        *slot = Box::into_raw(Box::new(VbcScenario(s)));
        Ok(())
    })
}

/// Parses and validates scenario TOML text.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `scenario` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vbc_scenario_parse(toml: *const c_char, scenario: *mut *mut VbcScenario) -> VbcStatus {
    guard(|| {
        let slot = out(scenario)?;
        let s = harness::parse_scenario(text(toml)?)?;
        *slot = Box::into_raw(Box::new(VbcScenario(s)));
        Ok(())
    })
}

/// Mode cutoff `N` of the scenario, or 0 for a null handle.
///
/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vbc_scenario_modes(scenario: *const VbcScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.0.discretization.modes)
}

/// # Safety
/// `scenario` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vbc_scenario_free(scenario: *mut VbcScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Builds the grids, transform and initial state of a scenario.
///
/// # Safety
/// `scenario` must be a live handle and `transform` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vbc_transform_new(scenario: *const VbcScenario, transform: *mut *mut VbcTransform) -> VbcStatus {
    guard(|| {
        let slot = out(transform)?;
        let setup = Setup::new(&handle(scenario)?.0)?;
        *slot = Box::into_raw(Box::new(VbcTransform(setup)));
        Ok(())
    })
}

/// # Safety
/// `transform` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vbc_transform_free(transform: *mut VbcTransform) {
    if !transform.is_null() {
        drop(Box::from_raw(transform));
    }
}

/// Number of radial nodes, or 0 for a null handle.
///
/// # Safety
/// `transform` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vbc_transform_radial_len(transform: *const VbcTransform) -> usize {
    transform.as_ref().map_or(0, |t| t.0.transform.radial.len())
}

/// Number of spectral nodes, or 0 for a null handle.
///
/// # Safety
/// `transform` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vbc_transform_spectral_len(transform: *const VbcTransform) -> usize {
    transform.as_ref().map_or(0, |t| t.0.transform.spectral.len())
}

/// Copies the radial nodes into `nodes[0..len]`.
///
/// # Safety
/// `transform` must be a live handle and `nodes` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn vbc_transform_radial_nodes(transform: *const VbcTransform, nodes: *mut f64, len: usize) -> VbcStatus {
    guard(|| {
        let src = &handle(transform)?.0.transform.radial.nodes;
        copy_real(src, nodes, len)
    })
}

/// Copies the spectral nodes `lambda_j` into `nodes[0..len]`.
///
/// # Safety
/// `transform` must be a live handle and `nodes` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn vbc_transform_spectral_nodes(transform: *const VbcTransform, nodes: *mut f64, len: usize) -> VbcStatus {
    guard(|| {
        let src = &handle(transform)?.0.transform.spectral.lambdas;
        copy_real(src, nodes, len)
    })
}

unsafe fn copy_real(src: &[f64], dst: *mut f64, len: usize) -> Result<(), Fail> {
    if dst.is_null() {
        return Err(Fail::Null);
    }
    if len != src.len() {
        return Err(Fail::Arg(format!("buffer holds {len} values, need {}", src.len())));
    }
    std::ptr::copy_nonoverlapping(src.as_ptr(), dst, len);
    Ok(())
}

/// Forward transform `W_{k,|k|-1}` of radial values sampled at the radial nodes.
///
/// # Safety
/// `values` must hold `2 radial_len` doubles and `spectrum` `2 spectral_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn vbc_transform_forward(
    transform: *const VbcTransform,
    k: i32,
    values: *const f64,
    radial_len: usize,
    spectrum: *mut f64,
    spectral_len: usize,
) -> VbcStatus {
    guard(|| {
        let wo = &handle(transform)?.0.transform;
        if radial_len != wo.radial.len() {
            return Err(Fail::Arg(format!("input holds {radial_len} values, need {}", wo.radial.len())));
        }
        let f = RadialFunction {
            grid: wo.radial.clone(),
            values: complex_in(values, radial_len)?,
        };
        let (a, b) = pair(k);
        let g = wo.forward(a, b, &f)?;
        complex_out(&g.values, spectrum, spectral_len)
    })
}

/// Inverse transform of a spectrum sampled at the spectral nodes.
///
/// # Safety
/// `spectrum` must hold `2 spectral_len` doubles and `values` `2 radial_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn vbc_transform_inverse(
    transform: *const VbcTransform,
    k: i32,
    spectrum: *const f64,
    spectral_len: usize,
    values: *mut f64,
    radial_len: usize,
) -> VbcStatus {
    guard(|| {
        let wo = &handle(transform)?.0.transform;
        if spectral_len != wo.spectral.len() {
            return Err(Fail::Arg(format!("input holds {spectral_len} values, need {}", wo.spectral.len())));
        }
        let g = SpectralFunction {
            grid: wo.spectral.clone(),
            values: complex_in(spectrum, spectral_len)?,
        };
        let (a, b) = pair(k);
        let f = wo.inverse(a, b, &g)?;
        complex_out(&f.values, values, radial_len)
    })
}

/// Runs `solver` on the scenario in memory.
///
/// # Safety
/// `scenario` must be a live handle and `run` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vbc_run_execute(scenario: *const VbcScenario, solver: VbcSolver, run: *mut *mut VbcRun) -> VbcStatus {
    guard(|| {
        let slot = out(run)?;
        let r = harness::execute(&handle(scenario)?.0, solver.into())?;
        *slot = Box::into_raw(Box::new(VbcRun(r)));
        Ok(())
    })
}

/// Writes the run's CSV and JSON artifacts into `dir`.
///
/// # Safety
/// `run` must be a live handle and `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn vbc_run_write(run: *const VbcRun, dir: *const c_char) -> VbcStatus {
    guard(|| {
        let r = handle(run)?;
        harness::write_outputs(&r.0, Path::new(text(dir)?))?;
        Ok(())
    })
}

/// Number of emission records, or 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vbc_run_record_count(run: *const VbcRun) -> usize {
    run.as_ref().map_or(0, |r| r.0.diagnostics.records.len())
}

/// Summary of record `index`.
///
/// # Safety
/// `run` must be a live handle and `record` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vbc_run_record(run: *const VbcRun, index: usize, record: *mut VbcRecord) -> VbcStatus {
    guard(|| {
        let slot = out(record)?;
        let recs = &handle(run)?.0.diagnostics.records;
        let r = recs
            .get(index)
            .ok_or_else(|| Fail::Arg(format!("record {index} out of range ({} records)", recs.len())))?;
        let max = |v: &[[f64; 2]]| v.iter().map(|c| c[0].hypot(c[1])).fold(0.0, f64::max);
        *slot = VbcRecord {
            t: r.t,
            max_manifold_residual: max(&r.manifold_residual),
            max_robin_residual: max(&r.robin_residual),
            circulation: r.circulation,
            boundary_velocity_norm: r.boundary_velocity_norm,
        };
        Ok(())
    })
}

/// Whether a `verify` run passed every check; false for other runs.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vbc_run_verify_passed(run: *const VbcRun) -> bool {
    run.as_ref()
        .and_then(|r| r.0.verify.as_ref())
        .is_some_and(|v| v.passed)
}

/// # Safety
/// `run` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vbc_run_free(run: *mut VbcRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
