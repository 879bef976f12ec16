//! C interface to the dive planner.
//!
//! Plans live behind an opaque [`DivePlanHandle`] created by
//! [`dive_plan_new`], [`dive_plan_for_rotor`] or [`dive_plan_from_json`] and
//! released with [`dive_plan_free`]. Every fallible call returns a
//! [`DiveStatus`]; the message of the most recent failure on the calling
//! thread is available from [`dive_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dive_core::document::PlanDocument;
use dive_core::dynamics::BodyParams;
use dive_core::elliptic;
use dive_core::plan::{plan, plan_for_rotor, DivePlan, DiveRequest};
use dive_core::simulator::{simulate_plan, Tolerances};
use dive_core::DiveError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiveStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Infeasible = 3,
    Numerical = 4,
    Panic = 5,
}

/// Body and rotor parameters in SI units.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DiveBody {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub l: f64,
    pub omega_d: f64,
    pub i_d: f64,
}

/// Solved quantities of a plan. Unsolved values are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DivePlanSummary {
    pub feasible: bool,
    /// 0 symmetric, 1 general.
    pub planner: u8,
    pub s: f64,
    pub s_minus: f64,
    pub rho: f64,
    pub h: f64,
    pub l: f64,
    /// Physical stage durations in seconds.
    pub durations: [f64; 5],
    pub phi: [f64; 5],
    pub psi: [f64; 5],
    pub terminal_sign: i8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DiveClosure {
    pub phi_total: f64,
    pub psi_total: f64,
    pub phi_error: f64,
    pub psi_error: f64,
    pub max_energy_drift: f64,
    pub max_norm_drift: f64,
    pub theta_final: f64,
    pub terminal_sign: i8,
}

/// Opaque plan.
pub struct DivePlanHandle {
    plan: DivePlan,
    t_tot: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &DiveError) -> DiveStatus {
    match e {
        DiveError::InvalidParams(_) | DiveError::Domain { .. } | DiveError::ChartSingularity { .. } => {
            DiveStatus::InvalidArgument
        }
        DiveError::NoRoot(_) | DiveError::Separatrix(_) => DiveStatus::Infeasible,
        _ => DiveStatus::Numerical,
    }
}

/// Runs `f`, recording errors and converting panics.
fn guard<F: FnOnce() -> Result<(), (DiveStatus, String)>>(f: F) -> DiveStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DiveStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            DiveStatus::Panic
        }
    }
}

fn lift(e: DiveError) -> (DiveStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (DiveStatus, String) {
    (DiveStatus::NullPointer, format!("{what} is null"))
}

fn body_from(b: &DiveBody) -> Result<BodyParams, (DiveStatus, String)> {
    BodyParams::new(b.i1, b.i2, b.i3, b.l).and_then(|p| p.with_rotor(b.omega_d, b.i_d)).map_err(lift)
}

fn store(out: *mut *mut DivePlanHandle, plan: DivePlan, t_tot: f64) {
    let handle = Box::new(DivePlanHandle { plan, t_tot });
    // SAFETY: callers check `out` for null before planning.
    unsafe { *out = Box::into_raw(handle) };
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dive_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Plans a dive with `body.l` given; the rotor is solved for. An infeasible
/// request still yields a handle with `feasible = false`.
///
/// # Safety
/// `body` must point to a valid [`DiveBody`] and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn dive_plan_new(
    body: *const DiveBody,
    m: f64,
    n: f64,
    t_tot: f64,
    out: *mut *mut DivePlanHandle,
) -> DiveStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let body = body_from(unsafe { body.as_ref() }.ok_or_else(|| null("body"))?)?;
        let req = DiveRequest::new(m, n, t_tot, body).map_err(lift)?;
        let p = plan(&req).map_err(lift)?;
        store(out, p, t_tot);
        Ok(())
    })
}

/// Plans with the rotor momentum `omega_d · i_d` fixed and solves for l;
/// `body.l` is ignored.
///
/// # Safety
/// As for [`dive_plan_new`].
#[no_mangle]
pub unsafe extern "C" fn dive_plan_for_rotor(
    body: *const DiveBody,
    m: f64,
    n: f64,
    t_tot: f64,
    out: *mut *mut DivePlanHandle,
) -> DiveStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let b = unsafe { body.as_ref() }.ok_or_else(|| null("body"))?;
        let body = body_from(&DiveBody { l: 1.0, ..*b })?;
        let p = plan_for_rotor(m, n, t_tot, body).map_err(lift)?;
        store(out, p, t_tot);
        Ok(())
    })
}

/// # Safety
/// `handle` must come from this library and not have been freed. Null is
/// accepted and ignored.
#[no_mangle]
pub unsafe extern "C" fn dive_plan_free(handle: *mut DivePlanHandle) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// # Safety
/// `handle` must be a live plan handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dive_plan_summary(handle: *const DivePlanHandle, out: *mut DivePlanSummary) -> DiveStatus {
    guard(|| {
        let h = unsafe { handle.as_ref() }.ok_or_else(|| null("handle"))?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        let p = &h.plan;
        *out = DivePlanSummary {
            feasible: p.feasible,
            planner: p.kind as u8,
            s: p.s,
            s_minus: p.s_minus,
            rho: p.rho,
            h: p.h,
            l: p.body.l,
            durations: p.durations,
            phi: p.phi,
            psi: p.psi,
            terminal_sign: p.terminal_sign,
        };
        Ok(())
    })
}

/// Serialises the plan as a JSON document. Release the string with
/// [`dive_string_free`].
///
/// # Safety
/// `handle` must be a live plan handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dive_plan_to_json(handle: *const DivePlanHandle, out: *mut *mut c_char) -> DiveStatus {
    guard(|| {
        let h = unsafe { handle.as_ref() }.ok_or_else(|| null("handle"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let json = PlanDocument::from_plan(&h.plan, h.t_tot).to_json();
        let c = CString::new(json).map_err(|e| (DiveStatus::Numerical, e.to_string()))?;
        unsafe { *out = c.into_raw() };
        Ok(())
    })
}

/// # Safety
/// `json` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dive_plan_from_json(json: *const c_char, out: *mut *mut DivePlanHandle) -> DiveStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = unsafe { CStr::from_ptr(json) }
            .to_str()
            .map_err(|e| (DiveStatus::InvalidArgument, format!("json is not UTF-8: {e}")))?;
        let doc = PlanDocument::from_json(text).map_err(lift)?;
        let p = doc.to_plan().map_err(lift)?;
        store(out, p, doc.request.t_tot);
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library (or be null).
#[no_mangle]
pub unsafe extern "C" fn dive_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Replays a feasible plan through the five stages. `rtol` ≤ 0 selects the
/// default integrator tolerance.
///
/// # Safety
/// `handle` must be a live plan handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dive_simulate(handle: *const DivePlanHandle, rtol: f64, out: *mut DiveClosure) -> DiveStatus {
    guard(|| {
        let h = unsafe { handle.as_ref() }.ok_or_else(|| null("handle"))?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        if !h.plan.feasible {
            return Err((
                DiveStatus::Infeasible,
                format!("plan is infeasible: {}", h.plan.violation.as_deref().unwrap_or("unspecified")),
            ));
        }
        let mut tol = Tolerances::default();
        if rtol > 0.0 {
            tol.rtol = rtol;
            tol.atol = rtol * 1e-2;
        }
        let rep = simulate_plan(&h.plan, &h.plan.dimensionless(), &tol).map_err(lift)?;
        *out = DiveClosure {
            phi_total: rep.phi_total,
            psi_total: rep.psi_total,
            phi_error: rep.phi_error,
            psi_error: rep.psi_error,
            max_energy_drift: rep.energy_drift.iter().cloned().fold(0.0, f64::max),
            max_norm_drift: rep.norm_drift.iter().cloned().fold(0.0, f64::max),
            theta_final: rep.theta_final,
            terminal_sign: rep.terminal_sign,
        };
        Ok(())
    })
}

fn scalar(out: *mut f64, f: impl FnOnce() -> dive_core::Result<f64>) -> DiveStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let v = f().map_err(lift)?;
        // SAFETY: checked non-null above; caller provides writable storage.
        unsafe { *out = v };
        Ok(())
    })
}

/// Complete elliptic integral of the first kind, parameter m = k².
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dive_ellip_k(m: f64, out: *mut f64) -> DiveStatus {
    scalar(out, || elliptic::ellip_k(m))
}

/// Complete elliptic integral of the second kind, parameter m = k².
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dive_ellip_e(m: f64, out: *mut f64) -> DiveStatus {
    scalar(out, || elliptic::ellip_e(m))
}

/// Complete elliptic integral of the third kind Π(n, m).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dive_ellip_pi(n: f64, m: f64, out: *mut f64) -> DiveStatus {
    scalar(out, || elliptic::ellip_pi(n, m))
}
