use std::ffi::CStr;
use std::ptr;

use fluidcc_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    unsafe {
        fcc_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn params(flows: usize) -> *mut FccParams {
    let mut p = ptr::null_mut();
    let st = unsafe { fcc_params_new(125000.0, 0.001, 0.2, 0.4, flows, &mut p) };
    assert_eq!(st, FccStatus::Ok);
    p
}

#[test]
fn fixed_point_round_trip() {
    let p = params(1);
    let mut fp = FccFixedPoint::default();
    assert_eq!(unsafe { fcc_fixed_point(p, FccAlgorithm::Cubic, &mut fp) }, FccStatus::Ok);
    assert!(fp.window > 125.0 && fp.loss_prob > 0.0);
    assert!((fp.since_loss * fp.window * fp.loss_prob / 0.001 - 1.0).abs() < 1e-9);
    unsafe { fcc_params_free(p) };
}

#[test]
fn invalid_params_report_an_error() {
    let mut p = ptr::null_mut();
    let st = unsafe { fcc_params_new(125000.0, -1.0, 0.2, 0.4, 1, &mut p) };
    assert_eq!(st, FccStatus::InvalidArgument);
    assert!(p.is_null());
    assert!(!last_error().is_empty());
    let needed = unsafe { fcc_last_error(ptr::null_mut(), 0) };
    assert_eq!(needed, last_error().len());
}

#[test]
fn null_handles_are_rejected() {
    let mut fp = FccFixedPoint::default();
    assert_eq!(unsafe { fcc_fixed_point(ptr::null(), FccAlgorithm::Reno, &mut fp) }, FccStatus::NullPointer);
    let p = params(1);
    assert_eq!(unsafe { fcc_fixed_point(p, FccAlgorithm::Reno, ptr::null_mut()) }, FccStatus::NullPointer);
    unsafe {
        fcc_params_free(p);
        fcc_params_free(ptr::null_mut());
        fcc_trajectory_free(ptr::null_mut());
        fcc_sim_result_free(ptr::null_mut());
    }
}

#[test]
fn trajectory_access() {
    let p = params(1);
    let mut fp = FccFixedPoint::default();
    let mut traj = ptr::null_mut();
    let mut len = 0;
    let mut s = FccSample::default();
    unsafe {
        fcc_fixed_point(p, FccAlgorithm::Cubic, &mut fp);
        let st = fcc_integrate(p, FccAlgorithm::Cubic, fp.window, fp.since_loss, 0.01, 0.001 / 20.0, 10, &mut traj);
        assert_eq!(st, FccStatus::Ok);
        fcc_trajectory_len(traj, &mut len);
        assert_eq!(len, 21);
        assert_eq!(fcc_trajectory_sample(traj, len - 1, &mut s), FccStatus::Ok);
        assert!((s.window - fp.window).abs() < 1e-9 * fp.window);
        assert_eq!(fcc_trajectory_sample(traj, len, &mut s), FccStatus::IndexOutOfRange);
        fcc_trajectory_free(traj);
        fcc_params_free(p);
    }
}

#[test]
fn simulation_is_seeded() {
    let p = params(2);
    let w = [130.0, 128.0];
    let s = [0.5, 1.0];
    let run = || unsafe {
        let mut r = ptr::null_mut();
        let st = fcc_simulate(p, FccAlgorithm::Cubic, FccLossModel::Aggregate, w.as_ptr(), s.as_ptr(), 2, 2.0, 0.01, 5, &mut r);
        assert_eq!(st, FccStatus::Ok);
        let mut n = 0;
        fcc_sim_event_count(r, &mut n);
        let events: Vec<(FccEventKind, f64, usize)> = (0..n)
            .map(|i| {
                let mut e = FccEvent { kind: FccEventKind::Loss, time: 0.0, flow: 0, window_before: 0.0, window_after: 0.0 };
                assert_eq!(fcc_sim_event(r, i, &mut e), FccStatus::Ok);
                (e.kind, e.time, e.flow)
            })
            .collect();
        let mut mean = 0.0;
        fcc_sim_mean_window_after(r, 1.0, &mut mean);
        fcc_sim_result_free(r);
        (events, mean)
    };
    let (a, ma) = run();
    let (b, mb) = run();
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert_eq!(ma, mb);
    unsafe { fcc_params_free(p) };
}

#[test]
fn flow_count_mismatch_is_invalid() {
    let p = params(2);
    let w = [130.0];
    let s = [0.5];
    let mut r = ptr::null_mut();
    let st = unsafe { fcc_simulate(p, FccAlgorithm::Cubic, FccLossModel::Aggregate, w.as_ptr(), s.as_ptr(), 1, 1.0, 0.1, 1, &mut r) };
    assert_eq!(st, FccStatus::InvalidArgument);
    assert!(r.is_null());
    unsafe { fcc_params_free(p) };
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/fluidcc.h")).unwrap();
    for name in ["fcc_params_new", "fcc_simulate", "fcc_last_error", "FCC_STATUS_NUMERIC_FAILURE", "typedef struct FccParams FccParams"] {
        assert!(header.contains(name), "missing {name}");
    }
}
