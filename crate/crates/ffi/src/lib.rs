//! C ABI over `fluidcc`.
//!
//! Every function returns an [`FccStatus`]; results come back through out
//! pointers. Objects are opaque handles released with the matching `_free`
//! function. After a non-OK status, `fcc_last_error` copies a message for
//! the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fluidcc::dde::{integrate, InitialHistory, IntegrateOptions, Trajectory};
use fluidcc::fixedpoint::{cubic_fixed_point, reno_equilibrium};
use fluidcc::nhpl::{run_simulation, EventKind, LossModel, SimOptions, SimResult};
use fluidcc::{Algorithm, Error, FlowState, SystemParams};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FccStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NumericFailure = 3,
    IndexOutOfRange = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FccAlgorithm {
    Reno = 0,
    Cubic = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FccLossModel {
    Aggregate = 0,
    PerFlow = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FccEventKind {
    Loss = 0,
    Indication = 1,
}

/// Opaque system parameters.
pub struct FccParams(SystemParams);

/// Opaque fluid trajectory.
pub struct FccTrajectory(Trajectory);

/// Opaque simulation result.
pub struct FccSimResult(SimResult);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FccFixedPoint {
    pub window: f64,
    pub since_loss: f64,
    pub loss_prob: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FccSample {
    pub t: f64,
    pub w_max: f64,
    pub since_loss: f64,
    pub window: f64,
    pub loss_prob: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FccEvent {
    pub kind: FccEventKind,
    pub time: f64,
    pub flow: usize,
    pub window_before: f64,
    pub window_after: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: FccStatus, msg: impl Into<String>) -> FccStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> FccStatus {
    let status = if e.is_numeric() { FccStatus::NumericFailure } else { FccStatus::InvalidArgument };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> FccStatus) -> FccStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(FccStatus::Panic, "internal panic"),
    }
}

fn algorithm(a: FccAlgorithm) -> Algorithm {
    match a {
        FccAlgorithm::Reno => Algorithm::Reno,
        FccAlgorithm::Cubic => Algorithm::Cubic,
    }
}

macro_rules! deref {
    ($p:expr) => {
        match unsafe { $p.as_ref() } {
            Some(v) => v,
            None => return fail(FccStatus::NullPointer, concat!(stringify!($p), " is null")),
        }
    };
}

macro_rules! out {
    ($p:expr) => {
        match unsafe { $p.as_mut() } {
            Some(v) => v,
            None => return fail(FccStatus::NullPointer, concat!(stringify!($p), " is null")),
        }
    };
}

/// Copies the last error message of this thread into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length, or 0
/// when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn fcc_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn fcc_params_new(
    capacity: f64,
    delay: f64,
    decrease: f64,
    scale: f64,
    flows: usize,
    out: *mut *mut FccParams,
) -> FccStatus {
    guard(|| {
        let out = out!(out);
        *out = ptr::null_mut();
        match SystemParams::new(capacity, delay, decrease, scale, flows) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(FccParams(p)));
                FccStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `params` must be null or a handle from `fcc_params_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fcc_params_free(params: *mut FccParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Steady state of the chosen algorithm.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fcc_fixed_point(params: *const FccParams, alg: FccAlgorithm, out: *mut FccFixedPoint) -> FccStatus {
    guard(|| {
        let p = &deref!(params).0;
        let out = out!(out);
        let fp = match algorithm(alg) {
            Algorithm::Cubic => cubic_fixed_point(p, 1e-12),
            Algorithm::Reno => reno_equilibrium(p),
        };
        match fp {
            Ok(fp) => {
                *out = FccFixedPoint { window: fp.window, since_loss: fp.since_loss, loss_prob: fp.loss_prob };
                FccStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Integrates the fluid model from a constant history `(w_max, since_loss)`,
/// keeping every `record_every`-th step.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fcc_integrate(
    params: *const FccParams,
    alg: FccAlgorithm,
    w_max: f64,
    since_loss: f64,
    t_end: f64,
    step: f64,
    record_every: usize,
    out: *mut *mut FccTrajectory,
) -> FccStatus {
    guard(|| {
        let p = &deref!(params).0;
        let out = out!(out);
        *out = ptr::null_mut();
        let init = match FlowState::new(w_max, since_loss) {
            Ok(s) => s,
            Err(e) => return from_error(e),
        };
        let opts = IntegrateOptions { t_end, step, record_every };
        match integrate(p, algorithm(alg).window_fn(), &InitialHistory::Constant(init), opts) {
            Ok(t) => {
                *out = Box::into_raw(Box::new(FccTrajectory(t)));
                FccStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `traj` must be a live handle and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn fcc_trajectory_len(traj: *const FccTrajectory, len: *mut usize) -> FccStatus {
    guard(|| {
        *out!(len) = deref!(traj).0.samples.len();
        FccStatus::Ok
    })
}

/// # Safety
/// `traj` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fcc_trajectory_sample(traj: *const FccTrajectory, index: usize, out: *mut FccSample) -> FccStatus {
    guard(|| {
        let t = &deref!(traj).0;
        let out = out!(out);
        let Some(s) = t.samples.get(index) else {
            return fail(FccStatus::IndexOutOfRange, format!("sample {index} of {}", t.samples.len()));
        };
        *out = FccSample { t: s.t, w_max: s.w_max, since_loss: s.since_loss, window: s.window, loss_prob: s.loss_prob };
        FccStatus::Ok
    })
}

/// # Safety
/// `traj` must be null or a handle from `fcc_integrate` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fcc_trajectory_free(traj: *mut FccTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Runs the Poisson-loss simulator. `w_max` and `since_loss` hold one entry
/// per flow.
///
/// # Safety
/// `params` must be a live handle, `w_max` and `since_loss` must point to
/// `flows` readable values each and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fcc_simulate(
    params: *const FccParams,
    alg: FccAlgorithm,
    loss_model: FccLossModel,
    w_max: *const f64,
    since_loss: *const f64,
    flows: usize,
    t_end: f64,
    sample_interval: f64,
    seed: u64,
    out: *mut *mut FccSimResult,
) -> FccStatus {
    guard(|| {
        let p = &deref!(params).0;
        let out = out!(out);
        *out = ptr::null_mut();
        if w_max.is_null() || since_loss.is_null() {
            return fail(FccStatus::NullPointer, "initial state arrays are null");
        }
        let (w, s) = (std::slice::from_raw_parts(w_max, flows), std::slice::from_raw_parts(since_loss, flows));
        let init = match w.iter().zip(s).map(|(w, s)| FlowState::new(*w, *s)).collect::<Result<Vec<_>, _>>() {
            Ok(v) => v,
            Err(e) => return from_error(e),
        };
        let mut opts = SimOptions::new(t_end, sample_interval, seed);
        opts.loss_model = match loss_model {
            FccLossModel::Aggregate => LossModel::Aggregate,
            FccLossModel::PerFlow => LossModel::PerFlow,
        };
        match run_simulation(p, algorithm(alg).window_fn(), &init, &opts) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(FccSimResult(r)));
                FccStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `res` must be a live handle and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn fcc_sim_event_count(res: *const FccSimResult, len: *mut usize) -> FccStatus {
    guard(|| {
        *out!(len) = deref!(res).0.events.len();
        FccStatus::Ok
    })
}

/// # Safety
/// `res` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fcc_sim_event(res: *const FccSimResult, index: usize, out: *mut FccEvent) -> FccStatus {
    guard(|| {
        let r = &deref!(res).0;
        let out = out!(out);
        let Some(e) = r.events.get(index) else {
            return fail(FccStatus::IndexOutOfRange, format!("event {index} of {}", r.events.len()));
        };
        *out = FccEvent {
            kind: match e.kind {
                EventKind::Loss => FccEventKind::Loss,
                EventKind::Indication => FccEventKind::Indication,
            },
            time: e.time,
            flow: e.flow,
            window_before: e.window_before,
            window_after: e.window_after,
        };
        FccStatus::Ok
    })
}

/// Mean per-flow window over trace samples at or after `from`.
///
/// # Safety
/// `res` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fcc_sim_mean_window_after(res: *const FccSimResult, from: f64, out: *mut f64) -> FccStatus {
    guard(|| {
        *out!(out) = deref!(res).0.mean_window_after(from);
        FccStatus::Ok
    })
}

/// # Safety
/// `res` must be null or a handle from `fcc_simulate` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fcc_sim_result_free(res: *mut FccSimResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}
