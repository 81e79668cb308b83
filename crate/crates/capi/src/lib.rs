//! C ABI over the `stagehunt` toolkit.
//!
//! Design rules, mirrored in the generated `include/stagehunt.h`:
//!
//! * every function returns an [`ShStatus`]; output pointers are written
//!   only on `SH_STATUS_OK`;
//! * heap objects cross the boundary as opaque handles ([`ShParams`],
//!   [`ShTrajectory`], [`ShBranch`]) released by their `sh_*_free`
//!   function — passing a handle to the wrong `free` is undefined
//!   behavior, double-freeing is too;
//! * fixed-size numeric results are written into caller-owned arrays
//!   (states are `double[4]`, Jacobians row-major `double[16]`);
//! * the last error message is thread-local; fetch it with
//!   [`sh_last_error`] right after a non-OK status;
//! * panics never unwind across the boundary — they surface as
//!   `SH_STATUS_NUMERICAL_FAILURE`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use stagehunt::continuation::{
    continue_equilibrium_both, BranchCurve, ContinuationConfig, ContinuationError, SpecialKind,
};
use stagehunt::equilibria::all_equilibria;
use stagehunt::model::{jacobian, rhs, ParamId, Params, State};
use stagehunt::normalform::{hopf_normal_form, transcritical_a2};
use stagehunt::simulate::{detect_attractor, integrate, Attractor, IntegratorConfig, Trajectory};
use stagehunt::stability::{eigenvalues, routh_hurwitz, CharCoeffs};

/// Outcome of every API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShStatus {
    /// Success; any promised outputs were written.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was malformed (unknown name, bad range, bad value).
    InvalidArgument = 2,
    /// The computation itself failed; see `sh_last_error`.
    NumericalFailure = 3,
    /// The requested object does not exist at these parameters.
    NotFound = 4,
    /// The caller-provided buffer cannot hold the full result.
    BufferTooSmall = 5,
}

/// Parameter set handle (nine positive rates).
pub struct ShParams(Params);

/// Integrated trajectory handle: sample times and states.
pub struct ShTrajectory {
    trajectory: Trajectory,
    params: Params,
}

/// Equilibrium branch handle from a continuation run.
pub struct ShBranch(BranchCurve);

/// One equilibrium: its kind code and coordinates.
///
/// Kinds: 0 extinction, 1 prey-only, 2 high-prey interior, 3 low-prey
/// interior.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ShEquilibrium {
    pub kind: i32,
    pub state: [f64; 4],
}

/// Hopf normal-form summary at an expansion point.
///
/// `l1` is the first Lyapunov quantity: negative means the emerging
/// cycle is stable (supercritical bifurcation).  `block_error` is the
/// residual of the block-diagonalization identity and should be tiny;
/// treat results with `block_error > 1e-6` as unreliable.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ShHopfData {
    pub alpha: f64,
    pub g20_re: f64,
    pub g20_im: f64,
    pub g11_re: f64,
    pub g11_im: f64,
    pub g02_re: f64,
    pub g02_im: f64,
    pub g21_re: f64,
    pub g21_im: f64,
    pub c1_re: f64,
    pub c1_im: f64,
    pub beta2: f64,
    pub l1: f64,
    pub block_error: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(status: ShStatus, msg: impl std::fmt::Display) -> ShStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.to_string());
    status
}

fn ok() -> ShStatus {
    LAST_ERROR.with(|e| e.borrow_mut().clear());
    ShStatus::Ok
}

macro_rules! nonnull {
    ($($ptr:expr),+ $(,)?) => {
        $(
            if $ptr.is_null() {
                return fail(ShStatus::NullPointer, concat!("null pointer: ", stringify!($ptr)));
            }
        )+
    };
}

unsafe fn read_state(ptr: *const f64) -> State {
    State::new(*ptr, *ptr.add(1), *ptr.add(2), *ptr.add(3))
}

unsafe fn write_state(ptr: *mut f64, s: &State) {
    *ptr = s.x;
    *ptr.add(1) = s.y1;
    *ptr.add(2) = s.y2;
    *ptr.add(3) = s.y3;
}

unsafe fn param_id(name: *const c_char) -> Result<ParamId, ShStatus> {
    if name.is_null() {
        return Err(fail(ShStatus::NullPointer, "null parameter name"));
    }
    let text = CStr::from_ptr(name)
        .to_str()
        .map_err(|_| fail(ShStatus::InvalidArgument, "parameter name is not UTF-8"))?;
    ParamId::ALL
        .iter()
        .copied()
        .find(|id| id.name() == text)
        .ok_or_else(|| fail(ShStatus::InvalidArgument, format!("unknown parameter `{text}`")))
}

fn guarded(f: impl FnOnce() -> ShStatus) -> ShStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(ShStatus::NumericalFailure, "internal panic"),
    }
}

// ---------------------------------------------------------------------
// Library metadata and error reporting.

/// Version string of the library, as a static NUL-terminated C string.
#[no_mangle]
pub extern "C" fn sh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the thread-local message of the most recent failure into
/// `buffer` (NUL-terminated, truncated to `capacity` bytes) and returns
/// the full message length in bytes, excluding the NUL.  Call with a
/// null `buffer` or zero `capacity` to query the required length.  The
/// message is empty after any successful call.
#[no_mangle]
pub unsafe extern "C" fn sh_last_error(buffer: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|e| {
        let message = e.borrow();
        let bytes = message.as_bytes();
        if !buffer.is_null() && capacity > 0 {
            let n = bytes.len().min(capacity - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buffer.cast(), n);
            *buffer.add(n) = 0;
        }
        bytes.len()
    })
}

// ---------------------------------------------------------------------
// Parameter sets.

/// First benchmark parameter set.  Free with `sh_params_free`.
#[no_mangle]
pub extern "C" fn sh_params_table1() -> *mut ShParams {
    Box::into_raw(Box::new(ShParams(Params::table1())))
}

/// Second benchmark parameter set.  Free with `sh_params_free`.
#[no_mangle]
pub extern "C" fn sh_params_table2() -> *mut ShParams {
    Box::into_raw(Box::new(ShParams(Params::table2())))
}

/// Releases a parameter handle.  Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn sh_params_free(params: *mut ShParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Sets one parameter by name (`a1`, `a2`, `a3`, `b`, `c`, `d1`, `d2`,
/// `d3`, `u`).  Values must be positive and finite.
#[no_mangle]
pub unsafe extern "C" fn sh_params_set(
    params: *mut ShParams,
    name: *const c_char,
    value: f64,
) -> ShStatus {
    nonnull!(params);
    let id = match param_id(name) {
        Ok(id) => id,
        Err(status) => return status,
    };
    let candidate = (*params).0.with(id, value);
    match candidate.validate() {
        Ok(()) => {
            (*params).0 = candidate;
            ok()
        }
        Err(e) => fail(ShStatus::InvalidArgument, e),
    }
}

/// Reads one parameter by name into `value`.
#[no_mangle]
pub unsafe extern "C" fn sh_params_get(
    params: *const ShParams,
    name: *const c_char,
    value: *mut f64,
) -> ShStatus {
    nonnull!(params, value);
    let id = match param_id(name) {
        Ok(id) => id,
        Err(status) => return status,
    };
    *value = (*params).0.get(id);
    ok()
}

// ---------------------------------------------------------------------
// Vector field and linearization.

/// Evaluates the vector field at `state[4]` into `out[4]`.
#[no_mangle]
pub unsafe extern "C" fn sh_rhs(
    params: *const ShParams,
    state: *const f64,
    out: *mut f64,
) -> ShStatus {
    nonnull!(params, state, out);
    let v = rhs(&read_state(state), &(*params).0);
    for i in 0..4 {
        *out.add(i) = v[i];
    }
    ok()
}

/// Writes the analytic Jacobian at `state[4]` into `out[16]`, row-major.
#[no_mangle]
pub unsafe extern "C" fn sh_jacobian(
    params: *const ShParams,
    state: *const f64,
    out: *mut f64,
) -> ShStatus {
    nonnull!(params, state, out);
    let m = jacobian(&read_state(state), &(*params).0);
    for row in 0..4 {
        for col in 0..4 {
            *out.add(row * 4 + col) = m[(row, col)];
        }
    }
    ok()
}

// ---------------------------------------------------------------------
// Equilibria and stability.

/// Writes every feasible equilibrium into `out[capacity]` and the total
/// count into `count`.  There are at most four.  When `capacity` is too
/// small the first `capacity` entries are written, `count` still
/// receives the total, and the call returns
/// `SH_STATUS_BUFFER_TOO_SMALL`.
#[no_mangle]
pub unsafe extern "C" fn sh_equilibria(
    params: *const ShParams,
    out: *mut ShEquilibrium,
    capacity: usize,
    count: *mut usize,
) -> ShStatus {
    nonnull!(params, count);
    let found = all_equilibria(&(*params).0);
    *count = found.len();
    if capacity > 0 {
        nonnull!(out);
    }
    for (i, e) in found.iter().take(capacity).enumerate() {
        *out.add(i) = ShEquilibrium {
            kind: e.kind as i32,
            state: [e.state.x, e.state.y1, e.state.y2, e.state.y3],
        };
    }
    if found.len() > capacity {
        fail(
            ShStatus::BufferTooSmall,
            format!("{} equilibria, capacity {capacity}", found.len()),
        )
    } else {
        ok()
    }
}

/// Eigenvalues of the Jacobian at `state[4]`, written as four
/// real/imaginary pairs sorted by descending real part.
#[no_mangle]
pub unsafe extern "C" fn sh_eigenvalues(
    params: *const ShParams,
    state: *const f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> ShStatus {
    nonnull!(params, state, out_re, out_im);
    guarded(|| {
        match eigenvalues(&jacobian(&read_state(state), &(*params).0)) {
            Ok(spectrum) => {
                for (i, v) in spectrum.values.iter().enumerate() {
                    *out_re.add(i) = v.re;
                    *out_im.add(i) = v.im;
                }
                ok()
            }
            Err(e) => fail(ShStatus::NumericalFailure, e),
        }
    })
}

/// Routh–Hurwitz test values `[eps1, eps4, eps1*eps2 - eps3, Delta]` of
/// the Jacobian at `state[4]`; `stable` receives 1 when all four are
/// positive (asymptotic stability), else 0.
#[no_mangle]
pub unsafe extern "C" fn sh_routh_hurwitz(
    params: *const ShParams,
    state: *const f64,
    out_tests: *mut f64,
    stable: *mut i32,
) -> ShStatus {
    nonnull!(params, state, out_tests, stable);
    let coeffs = CharCoeffs::of_matrix(&jacobian(&read_state(state), &(*params).0));
    let verdict = routh_hurwitz(&coeffs);
    for (i, t) in verdict.tests.iter().enumerate() {
        *out_tests.add(i) = *t;
    }
    *stable = i32::from(verdict.stable);
    ok()
}

// ---------------------------------------------------------------------
// Simulation.

/// Integrates from `init[4]` for `tmax` time units and returns a
/// trajectory handle through `out`.  A positive `stride` records samples
/// on that uniform grid; `stride <= 0` records every accepted step.
/// Free the handle with `sh_trajectory_free`.
#[no_mangle]
pub unsafe extern "C" fn sh_simulate(
    params: *const ShParams,
    init: *const f64,
    tmax: f64,
    stride: f64,
    out: *mut *mut ShTrajectory,
) -> ShStatus {
    nonnull!(params, init, out);
    let p = (*params).0;
    let start = read_state(init);
    if !start.is_finite() || [start.x, start.y1, start.y2, start.y3].iter().any(|v| *v < 0.0) {
        return fail(ShStatus::InvalidArgument, "initial state must be finite and nonnegative");
    }
    let cfg = IntegratorConfig {
        tmax,
        dense_stride: (stride > 0.0).then_some(stride),
        ..IntegratorConfig::default()
    };
    guarded(|| match integrate(&p, &start, &cfg) {
        Ok(trajectory) => {
            *out = Box::into_raw(Box::new(ShTrajectory { trajectory, params: p }));
            ok()
        }
        Err(e) => fail(ShStatus::NumericalFailure, e),
    })
}

/// Number of recorded samples.  Null yields 0.
#[no_mangle]
pub unsafe extern "C" fn sh_trajectory_len(trajectory: *const ShTrajectory) -> usize {
    if trajectory.is_null() {
        0
    } else {
        (*trajectory).trajectory.len()
    }
}

/// Reads sample `index` into `time` and `state[4]`.
#[no_mangle]
pub unsafe extern "C" fn sh_trajectory_sample(
    trajectory: *const ShTrajectory,
    index: usize,
    time: *mut f64,
    state: *mut f64,
) -> ShStatus {
    nonnull!(trajectory, time, state);
    let t = &(*trajectory).trajectory;
    if index >= t.len() {
        return fail(ShStatus::InvalidArgument, format!("index {index} >= {}", t.len()));
    }
    *time = t.t[index];
    write_state(state, &t.states[index]);
    ok()
}

/// Classifies where the trajectory settled.  `kind` receives -1 when
/// undecided, 0..3 for an equilibrium (see `ShEquilibrium` kinds), or 4
/// for a limit cycle; `measure` receives the sup-distance to the
/// equilibrium or the prey amplitude of the cycle (0 when undecided).
#[no_mangle]
pub unsafe extern "C" fn sh_attractor(
    trajectory: *const ShTrajectory,
    kind: *mut i32,
    measure: *mut f64,
) -> ShStatus {
    nonnull!(trajectory, kind, measure);
    guarded(|| {
        let handle = &*trajectory;
        match detect_attractor(&handle.params, &handle.trajectory) {
            Attractor::Undecided => {
                *kind = -1;
                *measure = 0.0;
            }
            Attractor::Equilibrium { kind: k, distance } => {
                *kind = k as i32;
                *measure = distance;
            }
            Attractor::LimitCycle { amplitude } => {
                *kind = 4;
                *measure = amplitude;
            }
        }
        ok()
    })
}

/// Releases a trajectory handle.  Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn sh_trajectory_free(trajectory: *mut ShTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}

// ---------------------------------------------------------------------
// Continuation.

/// Traces the equilibrium branch through the low-prey interior state in
/// the named parameter across `[lo, hi]` (both senses from the current
/// value, which must lie inside) and returns a branch handle through
/// `out`.  Fold, Hopf, and branch points are localized along the way.
/// Fails with `SH_STATUS_NOT_FOUND` when no feasible low interior
/// equilibrium exists at the current parameters.  Free the handle with
/// `sh_branch_free`.
#[no_mangle]
pub unsafe extern "C" fn sh_continue(
    params: *const ShParams,
    name: *const c_char,
    lo: f64,
    hi: f64,
    out: *mut *mut ShBranch,
) -> ShStatus {
    nonnull!(params, out);
    let id = match param_id(name) {
        Ok(id) => id,
        Err(status) => return status,
    };
    let p = (*params).0;
    let Some(seed) = all_equilibria(&p)
        .into_iter()
        .find(|e| e.kind == stagehunt::equilibria::EquilibriumKind::InteriorLow)
    else {
        return fail(
            ShStatus::NotFound,
            "no feasible low interior equilibrium at these parameters",
        );
    };
    guarded(|| {
        match continue_equilibrium_both(&p, id, &seed.state, (lo, hi), &ContinuationConfig::default())
        {
            Ok(curve) => {
                *out = Box::into_raw(Box::new(ShBranch(curve)));
                ok()
            }
            Err(e @ ContinuationError::BadRequest) => fail(ShStatus::InvalidArgument, e),
            Err(e) => fail(ShStatus::NumericalFailure, e),
        }
    })
}

/// Number of points on the branch.  Null yields 0.
#[no_mangle]
pub unsafe extern "C" fn sh_branch_len(branch: *const ShBranch) -> usize {
    if branch.is_null() {
        0
    } else {
        (*branch).0.points.len()
    }
}

/// Reads branch point `index`: parameter value, equilibrium `state[4]`,
/// and whether the equilibrium is stable there (1/0).
#[no_mangle]
pub unsafe extern "C" fn sh_branch_point(
    branch: *const ShBranch,
    index: usize,
    param: *mut f64,
    state: *mut f64,
    stable: *mut i32,
) -> ShStatus {
    nonnull!(branch, param, state, stable);
    let curve = &(*branch).0;
    let Some(point) = curve.points.get(index) else {
        return fail(
            ShStatus::InvalidArgument,
            format!("index {index} >= {}", curve.points.len()),
        );
    };
    *param = point.param;
    write_state(state, &point.state);
    *stable = i32::from(point.rh.stable);
    ok()
}

/// Number of special points (folds, Hopf points, branch points) found.
#[no_mangle]
pub unsafe extern "C" fn sh_branch_special_count(branch: *const ShBranch) -> usize {
    if branch.is_null() {
        0
    } else {
        (*branch).0.specials.len()
    }
}

/// Reads special point `index`.  `kind` receives 0 for a fold, 1 for a
/// Hopf point, 2 for a branch (transcritical) point; `l1` receives the
/// first Lyapunov quantity at a Hopf point and NaN otherwise.
#[no_mangle]
pub unsafe extern "C" fn sh_branch_special(
    branch: *const ShBranch,
    index: usize,
    kind: *mut i32,
    param: *mut f64,
    state: *mut f64,
    l1: *mut f64,
) -> ShStatus {
    nonnull!(branch, kind, param, state, l1);
    let curve = &(*branch).0;
    let Some(special) = curve.specials.get(index) else {
        return fail(
            ShStatus::InvalidArgument,
            format!("index {index} >= {}", curve.specials.len()),
        );
    };
    *kind = match special.kind {
        SpecialKind::Fold => 0,
        SpecialKind::Hopf => 1,
        SpecialKind::BranchPoint => 2,
    };
    *param = special.param;
    write_state(state, &special.state);
    *l1 = special.l1.unwrap_or(f64::NAN);
    ok()
}

/// Releases a branch handle.  Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn sh_branch_free(branch: *mut ShBranch) {
    if !branch.is_null() {
        drop(Box::from_raw(branch));
    }
}

// ---------------------------------------------------------------------
// Normal forms.

/// Hopf normal-form coefficients at `state[4]`, which must be an
/// equilibrium carrying a (near-)critical complex pair — e.g. a Hopf
/// special point from `sh_branch_special`.
#[no_mangle]
pub unsafe extern "C" fn sh_hopf_normal_form(
    params: *const ShParams,
    state: *const f64,
    out: *mut ShHopfData,
) -> ShStatus {
    nonnull!(params, state, out);
    guarded(|| {
        match hopf_normal_form(&(*params).0, &read_state(state)) {
            Ok(nf) => {
                *out = ShHopfData {
                    alpha: nf.alpha,
                    g20_re: nf.g20.re,
                    g20_im: nf.g20.im,
                    g11_re: nf.g11.re,
                    g11_im: nf.g11.im,
                    g02_re: nf.g02.re,
                    g02_im: nf.g02.im,
                    g21_re: nf.g21.re,
                    g21_im: nf.g21.im,
                    c1_re: nf.c1.re,
                    c1_im: nf.c1.im,
                    beta2: nf.beta2,
                    l1: nf.l1,
                    block_error: nf.block_error,
                };
                ok()
            }
            Err(e) => fail(ShStatus::NumericalFailure, e),
        }
    })
}

/// Closed-form transcritical threshold for the adult predation rate at
/// the prey-only state; fails when the geometry degenerates (equal
/// effective rates) or the threshold is nonpositive.
#[no_mangle]
pub unsafe extern "C" fn sh_transcritical_threshold(
    params: *const ShParams,
    out: *mut f64,
) -> ShStatus {
    nonnull!(params, out);
    match transcritical_a2(&(*params).0) {
        Ok(threshold) => {
            *out = threshold;
            ok()
        }
        Err(e) => fail(ShStatus::NumericalFailure, e),
    }
}
