use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use dive_ffi::*;

fn body(l: f64) -> DiveBody {
    DiveBody { i1: 20.0, i2: 20.0, i3: 1.0, l, omega_d: 0.0, i_d: 0.0 }
}

fn new_plan(b: &DiveBody, n: f64) -> *mut DivePlanHandle {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { dive_plan_new(b, 1.5, n, 1.5, &mut h) }, DiveStatus::Ok);
    assert!(!h.is_null());
    h
}

fn summary(h: *const DivePlanHandle) -> DivePlanSummary {
    let mut s = std::mem::MaybeUninit::uninit();
    assert_eq!(unsafe { dive_plan_summary(h, s.as_mut_ptr()) }, DiveStatus::Ok);
    unsafe { s.assume_init() }
}

fn last_error() -> String {
    let p = dive_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn plan_and_simulate() {
    let h = new_plan(&body(127.235), 2.0);
    let s = summary(h);
    assert!(s.feasible);
    assert_eq!(s.planner, 0);
    assert!((s.durations.iter().sum::<f64>() - 1.5).abs() < 1e-12);
    let mut c = std::mem::MaybeUninit::uninit();
    assert_eq!(unsafe { dive_simulate(h, 0.0, c.as_mut_ptr()) }, DiveStatus::Ok);
    let c = unsafe { c.assume_init() };
    assert!(c.phi_error < 1e-4 && c.psi_error < 1e-4);
    assert!(c.max_energy_drift < 1e-9);
    unsafe { dive_plan_free(h) };
}

#[test]
fn json_round_trip() {
    let h = new_plan(&body(127.235), 1.0);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { dive_plan_to_json(h, &mut json) }, DiveStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    assert!(text.contains("\"schema_version\": 1"));
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { dive_plan_from_json(json, &mut back) }, DiveStatus::Ok);
    let (a, b) = (summary(h), summary(back));
    assert_eq!(a.durations, b.durations);
    assert_eq!(a.s, b.s);
    unsafe {
        dive_string_free(json);
        dive_plan_free(h);
        dive_plan_free(back);
    }
}

#[test]
fn infeasible_plan_has_handle_but_does_not_simulate() {
    let h = new_plan(&body(40.0 * std::f64::consts::PI), 2.0);
    let s = summary(h);
    assert!(!s.feasible);
    assert!(s.s.is_nan() || s.s >= 0.0);
    let mut c = std::mem::MaybeUninit::uninit();
    assert_eq!(unsafe { dive_simulate(h, 0.0, c.as_mut_ptr()) }, DiveStatus::Infeasible);
    assert!(last_error().contains("infeasible"));
    unsafe { dive_plan_free(h) };
}

#[test]
fn rotor_mode() {
    let b = DiveBody { omega_d: 11.652819847064414, i_d: 1.0, ..body(0.0) };
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { dive_plan_for_rotor(&b, 1.5, 2.0, 1.5, &mut h) }, DiveStatus::Ok);
    assert!((summary(h).l - 127.235).abs() < 1e-6);
    unsafe { dive_plan_free(h) };
}

#[test]
fn errors_are_reported() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { dive_plan_new(ptr::null(), 1.5, 2.0, 1.5, &mut h) }, DiveStatus::NullPointer);
    assert!(last_error().contains("body"));
    let bad = DiveBody { i3: 30.0, ..body(127.0) };
    assert_eq!(unsafe { dive_plan_new(&bad, 1.5, 2.0, 1.5, &mut h) }, DiveStatus::InvalidArgument);
    assert!(last_error().contains("I3 < I1"));
    assert_eq!(unsafe { dive_plan_new(&body(127.0), 1.3, 2.0, 1.5, &mut h) }, DiveStatus::InvalidArgument);
    assert!(h.is_null());
    let junk = CString::new("{\"schema_version\": 7}").unwrap();
    assert_eq!(unsafe { dive_plan_from_json(junk.as_ptr(), &mut h) }, DiveStatus::InvalidArgument);
    assert_eq!(unsafe { dive_plan_summary(ptr::null(), ptr::null_mut()) }, DiveStatus::NullPointer);
    unsafe {
        dive_plan_free(ptr::null_mut());
        dive_string_free(ptr::null_mut());
    }
}

#[test]
fn elliptic_values() {
    let mut k = 0.0;
    assert_eq!(unsafe { dive_ellip_k(0.5, &mut k) }, DiveStatus::Ok);
    assert!((k - 1.854_074_677_301_372).abs() < 1e-14);
    let mut e = 0.0;
    assert_eq!(unsafe { dive_ellip_e(0.0, &mut e) }, DiveStatus::Ok);
    assert!((e - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    let mut p = 0.0;
    assert_eq!(unsafe { dive_ellip_pi(0.0, 0.5, &mut p) }, DiveStatus::Ok);
    assert!((p - k).abs() < 1e-14);
    assert_eq!(unsafe { dive_ellip_k(1.0, &mut k) }, DiveStatus::InvalidArgument);
}

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_api() {
    let header = std::fs::read_to_string(manifest_dir().join("include/dive.h")).unwrap();
    for name in [
        "typedef struct DivePlanHandle DivePlanHandle",
        "dive_plan_new",
        "dive_plan_for_rotor",
        "dive_plan_free",
        "dive_plan_summary",
        "dive_plan_to_json",
        "dive_plan_from_json",
        "dive_string_free",
        "dive_simulate",
        "dive_last_error",
        "DIVE_STATUS_INFEASIBLE = 3",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

/// Compiles a C program against the generated header and the static
/// library built alongside this test.
#[test]
fn c_program_links_and_runs() {
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let lib_dir = deps.parent().unwrap().to_path_buf();
    let lib = lib_dir.join("libdive_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let out_dir = tempfile::tempdir().unwrap();
    let exe = out_dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(manifest_dir().join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest_dir().join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .expect("cc runs");
    assert!(status.success());
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("1 0.0979"));
}
