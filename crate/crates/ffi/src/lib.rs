//! C interface to `fairpca`.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `*_free` function. Every fallible call returns an
//! [`FpcaStatus`]; on failure the message is available from
//! [`fpca_last_error_message`] on the same thread until the next failing call.
//! Matrices are dense, row-major `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fairpca::data::{split_groups, GroupedDataset};
use fairpca::linalg::{DataMatrix, Matrix, Subspace};
use fairpca::solver::{initial_subspace, Init, LineSearch};
use fairpca::{pareto_fair_pca, Error, FairPcaProblem, Mode, Penalty, ProblemOptions, SolveResult, SolverConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpcaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    Numeric = 4,
    Data = 5,
    Config = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpcaMode {
    Pairwise = 0,
    Single = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpcaPenalty {
    Squared = 0,
    Exponential = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpcaLineSearch {
    Backtracking = 0,
    InvSqrt = 1,
}

/// Solver settings. Start from [`fpca_solver_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FpcaSolverConfig {
    pub max_iters: usize,
    pub beta: f64,
    pub line_search: FpcaLineSearch,
    pub stationarity_tol: f64,
    pub seed: u64,
    pub normalize: bool,
    /// Start from plain PCA instead of a seeded random basis.
    pub pca_init: bool,
}

/// A fair PCA problem built from grouped data.
pub struct FpcaProblem {
    inner: FairPcaProblem,
}

/// The outcome of one solve.
pub struct FpcaResult {
    inner: SolveResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FpcaStatus {
    match e {
        Error::InvalidInput(_) | Error::Range { .. } | Error::InvalidPair(_) => FpcaStatus::InvalidArgument,
        Error::Dimension(_) => FpcaStatus::Dimension,
        Error::Numeric(_) | Error::DegenerateStep(_) | Error::LineSearch { .. } | Error::NonFinite { .. } => {
            FpcaStatus::Numeric
        }
        Error::Config(_) => FpcaStatus::Config,
        Error::Io(_) => FpcaStatus::Io,
        _ => FpcaStatus::Data,
    }
}

/// Runs `f`, converting errors and panics into a status and stored message.
fn guard(f: impl FnOnce() -> Result<(), (FpcaStatus, String)>) -> FpcaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FpcaStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(&message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("panic: {msg}"));
            FpcaStatus::Panic
        }
    }
}

fn lib<T>(r: fairpca::Result<T>) -> Result<T, (FpcaStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (FpcaStatus, String) {
    (FpcaStatus::NullPointer, format!("{what} is null"))
}

fn invalid(message: String) -> (FpcaStatus, String) {
    (FpcaStatus::InvalidArgument, message)
}

fn write_out(values: &[f64], out: *mut f64, len: usize) -> Result<(), (FpcaStatus, String)> {
    if out.is_null() {
        return Err(null("output buffer"));
    }
    if len < values.len() {
        return Err(invalid(format!("output buffer holds {len} values, need {}", values.len())));
    }
    // SAFETY: the caller guarantees `out` has room for `len >= values.len()` doubles.
    unsafe { ptr::copy_nonoverlapping(values.as_ptr(), out, values.len()) };
    Ok(())
}

fn row_major(m: &Matrix) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

/// Message of the most recent failure on this thread, or NULL.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fpca_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fpca_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn fpca_solver_config_default() -> FpcaSolverConfig {
    let d = SolverConfig::default();
    FpcaSolverConfig {
        max_iters: d.max_iters,
        beta: d.beta,
        line_search: FpcaLineSearch::Backtracking,
        stationarity_tol: d.stationarity_tol,
        seed: d.seed,
        normalize: d.normalize,
        pca_init: false,
    }
}

/// Builds a problem from `n` rows of `d` features and a group id per row.
///
/// Group ids must cover `0..k` with no empty group. A negative or NaN
/// `alpha` selects the coefficient derived from the group spectra.
///
/// # Safety
/// `data` must point to `n * d` readable doubles and `group_ids` to `n`
/// readable values; `out` must be a valid place to store a handle.
#[no_mangle]
pub unsafe extern "C" fn fpca_problem_new(
    data: *const f64,
    n: usize,
    d: usize,
    group_ids: *const usize,
    k: usize,
    r: usize,
    mode: FpcaMode,
    penalty: FpcaPenalty,
    alpha: f64,
    out: *mut *mut FpcaProblem,
) -> FpcaStatus {
    guard(|| {
        if data.is_null() || group_ids.is_null() || out.is_null() {
            return Err(null("data, group_ids or out"));
        }
        let len = n.checked_mul(d).ok_or_else(|| invalid("n * d overflows".into()))?;
        // SAFETY: lengths are guaranteed by the caller.
        let values = unsafe { std::slice::from_raw_parts(data, len) };
        let ids = unsafe { std::slice::from_raw_parts(group_ids, n) }.to_vec();
        let matrix = lib(DataMatrix::new(Matrix::from_row_slice(n, d, values)))?;
        let names = (0..k).map(|g| g.to_string()).collect();
        let features = (0..d).map(|j| format!("x{j}")).collect();
        let gd = lib(GroupedDataset::new(matrix, ids, names, None, features))?;
        let options = ProblemOptions {
            mode: match mode {
                FpcaMode::Pairwise => Mode::Pairwise,
                FpcaMode::Single => Mode::Single,
            },
            penalty: match penalty {
                FpcaPenalty::Squared => Penalty::Squared,
                FpcaPenalty::Exponential => Penalty::Exponential,
            },
            alpha: (alpha >= 0.0).then_some(alpha),
        };
        let inner = lib(FairPcaProblem::from_groups(&split_groups(&gd), r, options))?;
        // SAFETY: `out` is non-null and writable per the contract.
        unsafe { *out = Box::into_raw(Box::new(FpcaProblem { inner })) };
        Ok(())
    })
}

/// # Safety
/// `problem` must be NULL or a handle from [`fpca_problem_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fpca_problem_free(problem: *mut FpcaProblem) {
    if !problem.is_null() {
        // SAFETY: ownership returns to Rust exactly once.
        drop(unsafe { Box::from_raw(problem) });
    }
}

/// Number of objectives; 0 for a NULL handle.
///
/// # Safety
/// `problem` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fpca_problem_objective_count(problem: *const FpcaProblem) -> usize {
    // SAFETY: live handle or NULL per the contract.
    unsafe { problem.as_ref() }.map_or(0, |p| p.inner.objective_count())
}

/// Regularization coefficient in use; NaN for a NULL handle.
///
/// # Safety
/// `problem` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fpca_problem_alpha(problem: *const FpcaProblem) -> f64 {
    // SAFETY: live handle or NULL per the contract.
    unsafe { problem.as_ref() }.map_or(f64::NAN, |p| p.inner.alpha())
}

/// Objective values at the `d × r` row-major point `u`.
///
/// # Safety
/// `problem` must be a live handle, `u` must hold `d * r` doubles and `out`
/// must have room for `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fpca_problem_evaluate(
    problem: *const FpcaProblem,
    u: *const f64,
    out: *mut f64,
    out_len: usize,
) -> FpcaStatus {
    guard(|| {
        // SAFETY: live handle or NULL per the contract.
        let p = unsafe { problem.as_ref() }.ok_or_else(|| null("problem"))?;
        if u.is_null() {
            return Err(null("u"));
        }
        let (d, r) = (p.inner.ambient_dim(), p.inner.target_dim());
        // SAFETY: `u` holds `d * r` doubles per the contract.
        let values = unsafe { std::slice::from_raw_parts(u, d * r) };
        let f = p.inner.evaluate(&Matrix::from_row_slice(d, r, values));
        write_out(f.values(), out, out_len)
    })
}

/// Plain PCA basis of the pooled data, `d × r` row-major.
///
/// # Safety
/// `problem` must be a live handle and `out` must have room for `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fpca_plain_pca(problem: *const FpcaProblem, out: *mut f64, out_len: usize) -> FpcaStatus {
    guard(|| {
        // SAFETY: live handle or NULL per the contract.
        let p = unsafe { problem.as_ref() }.ok_or_else(|| null("problem"))?;
        let u = lib(p.inner.plain_pca())?;
        write_out(&row_major(u.basis()), out, out_len)
    })
}

/// Runs the solver. `config` may be NULL for defaults.
///
/// # Safety
/// `problem` must be a live handle, `config` NULL or readable, and `out` a
/// valid place to store a handle.
#[no_mangle]
pub unsafe extern "C" fn fpca_solve(
    problem: *const FpcaProblem,
    config: *const FpcaSolverConfig,
    out: *mut *mut FpcaResult,
) -> FpcaStatus {
    guard(|| {
        // SAFETY: live handle or NULL per the contract.
        let p = unsafe { problem.as_ref() }.ok_or_else(|| null("problem"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: readable or NULL per the contract.
        let c = unsafe { config.as_ref() }.copied().unwrap_or_else(|| fpca_solver_config_default());
        let config = SolverConfig {
            max_iters: c.max_iters,
            beta: c.beta,
            line_search: match c.line_search {
                FpcaLineSearch::Backtracking => LineSearch::Backtracking,
                FpcaLineSearch::InvSqrt => LineSearch::InvSqrt,
            },
            stationarity_tol: c.stationarity_tol,
            seed: c.seed,
            normalize: c.normalize,
            init: if c.pca_init { Init::Pca } else { Init::Random },
            ..SolverConfig::default()
        };
        let u0: Subspace = lib(initial_subspace(&p.inner, config.init, config.seed))?;
        let inner = lib(pareto_fair_pca(&p.inner, &config, &u0))?;
        // SAFETY: `out` is non-null and writable per the contract.
        unsafe { *out = Box::into_raw(Box::new(FpcaResult { inner })) };
        Ok(())
    })
}

/// # Safety
/// `result` must be NULL or a handle from [`fpca_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fpca_result_free(result: *mut FpcaResult) {
    if !result.is_null() {
        // SAFETY: ownership returns to Rust exactly once.
        drop(unsafe { Box::from_raw(result) });
    }
}

/// Solved basis, `d × r` row-major.
///
/// # Safety
/// `result` must be a live handle and `out` must have room for `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fpca_result_subspace(result: *const FpcaResult, out: *mut f64, out_len: usize) -> FpcaStatus {
    guard(|| {
        // SAFETY: live handle or NULL per the contract.
        let res = unsafe { result.as_ref() }.ok_or_else(|| null("result"))?;
        write_out(&row_major(res.inner.subspace.basis()), out, out_len)
    })
}

/// Final objective values.
///
/// # Safety
/// `result` must be a live handle and `out` must have room for `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fpca_result_objectives(result: *const FpcaResult, out: *mut f64, out_len: usize) -> FpcaStatus {
    guard(|| {
        // SAFETY: live handle or NULL per the contract.
        let res = unsafe { result.as_ref() }.ok_or_else(|| null("result"))?;
        write_out(res.inner.objectives.values(), out, out_len)
    })
}

/// Iterations run; 0 for a NULL handle.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fpca_result_iterations(result: *const FpcaResult) -> usize {
    // SAFETY: live handle or NULL per the contract.
    unsafe { result.as_ref() }.map_or(0, |r| r.inner.iterations())
}

/// Whether the run stopped at a Pareto-stationary point.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fpca_result_stationary(result: *const FpcaResult) -> bool {
    // SAFETY: live handle or NULL per the contract.
    unsafe { result.as_ref() }.is_some_and(|r| r.inner.stationary)
}
