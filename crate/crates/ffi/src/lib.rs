//! C interface to `delayswitch`.
//!
//! Systems and reports are opaque heap handles released with their `_free`
//! function. Every fallible call returns a `DsStatus`; on failure the message
//! is available from `ds_last_error` on the same thread.

use delayswitch::charpoly::quasi_polynomial;
use delayswitch::model::{
    build_system, classify_baseline, BaselineVerdict, DelayPlacement, DelaySystem, InteractionMatrix,
};
use delayswitch::sim::{default_horizon, default_step, growth_rate, integrate, HistoryFunction};
use delayswitch::spectral::stability_at;
use delayswitch::switch_analysis::{switch_report, Direction, SwitchError, SwitchReport};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NonGeneric = 3,
    OutOfRange = 4,
    Failed = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsBaselineVerdict {
    Stable = 0,
    Unstable = 1,
    MarginalCenter = 2,
    MarginalZeroRoot = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsDirection {
    Destabilizing = 0,
    Stabilizing = 1,
}

/// Opaque delay system.
pub struct DsSystem {
    inner: DelaySystem,
}

/// Opaque switch report.
pub struct DsReport {
    inner: SwitchReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: DsStatus, msg: impl Into<String>) -> DsStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> DsStatus) -> DsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(DsStatus::Panic, "internal panic"),
    }
}

fn switch_status(e: SwitchError) -> DsStatus {
    let status = match &e {
        SwitchError::NonGeneric(_) => DsStatus::NonGeneric,
        SwitchError::BadWindow { .. } | SwitchError::Model(_) => DsStatus::InvalidArgument,
        _ => DsStatus::Failed,
    };
    fail(status, e.to_string())
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ds_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Build a system from 4 or 7 coefficients and a placement name.
/// `a13` is read only for the `mixed_self` placement.
///
/// # Safety
/// `coeffs` must point to `len` doubles, `placement` to a NUL-terminated
/// string and `out` to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn ds_system_new(
    coeffs: *const f64,
    len: usize,
    placement: *const c_char,
    a13: f64,
    out: *mut *mut DsSystem,
) -> DsStatus {
    guard(|| {
        if coeffs.is_null() || placement.is_null() || out.is_null() {
            return fail(DsStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        let c = std::slice::from_raw_parts(coeffs, len);
        let Ok(name) = CStr::from_ptr(placement).to_str() else {
            return fail(DsStatus::InvalidArgument, "placement is not UTF-8");
        };
        let built = InteractionMatrix::from_coefficients(c)
            .and_then(|m| Ok((m, DelayPlacement::parse(name, Some(a13))?)))
            .and_then(|(m, p)| build_system(m, p));
        match built {
            Ok(sys) => {
                *out = Box::into_raw(Box::new(DsSystem { inner: sys }));
                DsStatus::Ok
            }
            Err(e) => fail(DsStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// # Safety
/// `sys` must come from `ds_system_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ds_system_free(sys: *mut DsSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Delay-free trace, determinant and verdict of a planar system.
///
/// # Safety
/// Pointers must be valid; `sys` must come from `ds_system_new`.
#[no_mangle]
pub unsafe extern "C" fn ds_system_baseline(
    sys: *const DsSystem,
    trace: *mut f64,
    determinant: *mut f64,
    verdict: *mut DsBaselineVerdict,
) -> DsStatus {
    guard(|| {
        if sys.is_null() || trace.is_null() || determinant.is_null() || verdict.is_null() {
            return fail(DsStatus::NullPointer, "null argument");
        }
        let s = &(*sys).inner;
        match classify_baseline(&s.baseline_matrix()) {
            Ok(b) => {
                *trace = b.trace;
                *determinant = b.determinant;
                *verdict = match b.verdict {
                    BaselineVerdict::Stable => DsBaselineVerdict::Stable,
                    BaselineVerdict::Unstable => DsBaselineVerdict::Unstable,
                    BaselineVerdict::MarginalCenter => DsBaselineVerdict::MarginalCenter,
                    BaselineVerdict::MarginalZeroRoot => DsBaselineVerdict::MarginalZeroRoot,
                };
                DsStatus::Ok
            }
            Err(e) => fail(DsStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Stability switches on `[0, tau_max]`.
///
/// # Safety
/// `sys` must come from `ds_system_new`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_switch_report(sys: *const DsSystem, tau_max: f64, out: *mut *mut DsReport) -> DsStatus {
    guard(|| {
        if sys.is_null() || out.is_null() {
            return fail(DsStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        match switch_report(&(*sys).inner, tau_max) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(DsReport { inner: r }));
                DsStatus::Ok
            }
            Err(e) => switch_status(e),
        }
    })
}

/// # Safety
/// `report` must come from `ds_switch_report` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ds_report_free(report: *mut DsReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of switches inside the report window; 0 for NULL.
///
/// # Safety
/// `report` must be NULL or come from `ds_switch_report`.
#[no_mangle]
pub unsafe extern "C" fn ds_report_switch_count(report: *const DsReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.switches.len())
}

/// Delay and direction of switch `index`.
///
/// # Safety
/// `report` must come from `ds_switch_report`; output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_report_switch(
    report: *const DsReport,
    index: usize,
    tau: *mut f64,
    direction: *mut DsDirection,
) -> DsStatus {
    guard(|| {
        if report.is_null() || tau.is_null() || direction.is_null() {
            return fail(DsStatus::NullPointer, "null argument");
        }
        let r = &*report;
        let Some(e) = r.inner.switches.get(index) else {
            return fail(DsStatus::OutOfRange, format!("switch index {index} out of range"));
        };
        *tau = e.tau;
        *direction = match e.direction {
            Direction::Destabilizing => DsDirection::Destabilizing,
            Direction::Stabilizing => DsDirection::Stabilizing,
        };
        DsStatus::Ok
    })
}

/// The full report as a JSON string, released with `ds_string_free`.
///
/// # Safety
/// `report` must come from `ds_switch_report`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_report_to_json(report: *const DsReport, out: *mut *mut c_char) -> DsStatus {
    guard(|| {
        if report.is_null() || out.is_null() {
            return fail(DsStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        match serde_json::to_string(&(*report).inner).map(CString::new) {
            Ok(Ok(s)) => {
                *out = s.into_raw();
                DsStatus::Ok
            }
            _ => fail(DsStatus::Failed, "report could not be serialized"),
        }
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn ds_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Right half-plane root count at `tau` from the argument-principle oracle.
/// `marginal` is set to 1 when a root lies on the imaginary axis.
///
/// # Safety
/// `sys` must come from `ds_system_new`; output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_unstable_count(
    sys: *const DsSystem,
    tau: f64,
    count: *mut usize,
    marginal: *mut i32,
) -> DsStatus {
    guard(|| {
        if sys.is_null() || count.is_null() || marginal.is_null() {
            return fail(DsStatus::NullPointer, "null argument");
        }
        let w = quasi_polynomial(&(*sys).inner);
        match stability_at(&w, tau) {
            Ok((n, state)) => {
                *count = n;
                *marginal = i32::from(state == delayswitch::spectral::SpectralState::Marginal);
                DsStatus::Ok
            }
            Err(e) => fail(DsStatus::Failed, e.to_string()),
        }
    })
}

/// Growth rate of a simulated trajectory from the all-ones history with the
/// default step and horizon.
///
/// # Safety
/// `sys` must come from `ds_system_new`; `rate` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_growth_rate(sys: *const DsSystem, tau: f64, rate: *mut f64) -> DsStatus {
    guard(|| {
        if sys.is_null() || rate.is_null() {
            return fail(DsStatus::NullPointer, "null argument");
        }
        let s = &(*sys).inner;
        let history = HistoryFunction::constant_ones(s.dimension());
        match integrate(s, tau, &history, default_horizon(tau), default_step(tau)) {
            Ok(t) => {
                *rate = growth_rate(&t).rate;
                DsStatus::Ok
            }
            Err(e) => fail(DsStatus::InvalidArgument, e.to_string()),
        }
    })
}
