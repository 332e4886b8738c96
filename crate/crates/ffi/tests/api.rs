use std::ptr;

use rmglab_ffi::*;

fn identity_state(lambda: [f64; 3]) -> RmgLumpState {
    RmgLumpState {
        o: [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        omega: [0.3, -0.2, 0.5],
        lambda,
        lambda_dot: [0.1, 0.2, 0.05],
    }
}

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    let n = unsafe { rmg_last_error(buf.as_mut_ptr(), buf.len()) };
    let s = unsafe { std::ffi::CStr::from_ptr(buf.as_ptr()) };
    assert!(s.to_bytes().len() == n.min(255));
    s.to_string_lossy().into_owned()
}

#[test]
fn version_matches_crate() {
    let v = unsafe { std::ffi::CStr::from_ptr(rmg_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn hyp2_profile_anchor() {
    let mut row = [0.0; 9];
    assert_eq!(unsafe { rmg_hyp2_profile(1.0, row.as_mut_ptr()) }, RmgStatus::Ok);
    assert_eq!(row[0], 1.0);
    assert!(row[1] > 0.0);
    assert_eq!(unsafe { rmg_hyp2_profile(-1.0, row.as_mut_ptr()) }, RmgStatus::InvalidArgument);
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { rmg_hyp2_profile(1.0, ptr::null_mut()) }, RmgStatus::NullPointer);
}

#[test]
fn geodesic_run_keeps_speed() {
    let init = RmgReducedSample {
        s: 2.0,
        s_dot: 0.3,
        psi_dot: 0.05,
        ..Default::default()
    };
    let mut traj = ptr::null_mut();
    let st = unsafe { rmg_hyp2_evolve(RmgFlow::Geodesic, 1.0, init, 10.0, 11, ptr::null(), &mut traj) };
    assert_eq!(st, RmgStatus::Ok);
    assert_eq!(unsafe { rmg_reduced_trajectory_len(traj) }, 11);
    assert_eq!(unsafe { rmg_reduced_trajectory_termination(traj) }, RmgTermination::Completed);
    let mut first = RmgReducedSample::default();
    let mut last = RmgReducedSample::default();
    unsafe {
        assert_eq!(rmg_reduced_trajectory_sample(traj, 0, &mut first), RmgStatus::Ok);
        assert_eq!(rmg_reduced_trajectory_sample(traj, 10, &mut last), RmgStatus::Ok);
        assert_eq!(rmg_reduced_trajectory_sample(traj, 11, &mut last), RmgStatus::IndexOutOfRange);
        rmg_reduced_trajectory_free(traj);
    }
    assert_eq!(first.t, 0.0);
    assert!(((last.speed - first.speed) / first.speed).abs() < 1e-8);
}

#[test]
fn invalid_run_leaves_null_handle() {
    let init = RmgReducedSample {
        s: 0.0,
        ..Default::default()
    };
    let mut traj = 1usize as *mut RmgReducedTrajectory;
    let st = unsafe { rmg_hyp2_evolve(RmgFlow::Extrinsic, 1.0, init, 1.0, 5, ptr::null(), &mut traj) };
    assert_eq!(st, RmgStatus::InvalidArgument);
    assert!(traj.is_null());
    let bad = RmgOdeOptions {
        rel_tol: -1.0,
        ..Default::default()
    };
    let init = RmgReducedSample {
        s: 1.0,
        ..Default::default()
    };
    let st = unsafe { rmg_hyp2_evolve(RmgFlow::Extrinsic, 1.0, init, 1.0, 5, &bad, &mut traj) };
    assert_eq!(st, RmgStatus::InvalidArgument);
}

#[test]
fn lump_run_conserves_charges() {
    let s0 = identity_state([1.2, 0.4, -0.7]);
    let mut c0 = RmgCharges::default();
    assert_eq!(unsafe { rmg_lump_charges(&s0, &mut c0) }, RmgStatus::Ok);
    let opts = RmgOdeOptions {
        abs_tol: 1e-11,
        rel_tol: 1e-11,
        ..Default::default()
    };
    let mut traj = ptr::null_mut();
    assert_eq!(unsafe { rmg_lump_evolve(&s0, 5.0, 6, &opts, &mut traj) }, RmgStatus::Ok);
    assert_eq!(unsafe { rmg_lump_trajectory_len(traj) }, 6);
    let (mut t, mut st, mut c) = (0.0, RmgLumpState::default(), RmgCharges::default());
    unsafe {
        assert_eq!(rmg_lump_trajectory_sample(traj, 5, &mut t, &mut st, &mut c), RmgStatus::Ok);
        assert_eq!(rmg_lump_trajectory_sample(traj, 0, ptr::null_mut(), ptr::null_mut(), ptr::null_mut()), RmgStatus::Ok);
        assert_eq!(rmg_lump_trajectory_termination(traj), RmgTermination::Completed);
        rmg_lump_trajectory_free(traj);
    }
    assert_eq!(t, 5.0);
    assert!(((c.e - c0.e) / c0.e).abs() < 1e-8);
    for i in 0..3 {
        assert!((c.p[i] - c0.p[i]).abs() < 1e-8);
        assert!((c.q[i] - c0.q[i]).abs() < 1e-8);
    }
    let mut again = RmgCharges::default();
    assert_eq!(unsafe { rmg_lump_charges(&st, &mut again) }, RmgStatus::Ok);
    assert!((again.e - c.e).abs() < 1e-12);
}

#[test]
fn lump_rejects_bad_rotation() {
    let mut s = identity_state([1.0, 0.0, 0.0]);
    s.o[0] = 2.0;
    let mut traj = ptr::null_mut();
    assert_eq!(unsafe { rmg_lump_evolve(&s, 1.0, 3, ptr::null(), &mut traj) }, RmgStatus::InvalidArgument);
    assert!(traj.is_null());
    assert!(last_error().contains("orthogonal"));
}

#[test]
fn ratn_geometry_handle() {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { rmg_ratn_geometry_new(1, &mut g) }, RmgStatus::InvalidArgument);
    assert!(g.is_null());
    assert_eq!(unsafe { rmg_ratn_geometry_new(2, &mut g) }, RmgStatus::Ok);
    let (mut f, mut f_inv) = (0.0, 0.0);
    let mut row = [0.0; 6];
    let mut v = 0.0;
    unsafe {
        assert_eq!(rmg_ratn_f_metric(g, 0.5, &mut f), RmgStatus::Ok);
        assert_eq!(rmg_ratn_f_metric(g, 2.0, &mut f_inv), RmgStatus::Ok);
        assert_eq!(rmg_ratn_profile_row(g, 0.5, 0.0, row.as_mut_ptr()), RmgStatus::Ok);
        assert_eq!(
            rmg_ratn_effective_potential(g, 0.0, 0.5, RmgPotentialMode::Extrinsic, &mut v),
            RmgStatus::Ok
        );
        rmg_ratn_geometry_free(g);
    }
    // F(1/ρ) = ρ⁴ F(ρ)
    assert!((f_inv - f / 16.0).abs() < 1e-10 * f);
    assert_eq!(row[0], 0.5);
    assert!((row[4] - v).abs() < 1e-12 * v.abs().max(1.0));
}

#[test]
fn free_accepts_null() {
    unsafe {
        rmg_reduced_trajectory_free(ptr::null_mut());
        rmg_lump_trajectory_free(ptr::null_mut());
        rmg_ratn_geometry_free(ptr::null_mut());
    }
    assert_eq!(unsafe { rmg_reduced_trajectory_len(ptr::null()) }, 0);
}
