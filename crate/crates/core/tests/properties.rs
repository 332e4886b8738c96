use nalgebra::{Rotation3, Vector3};
use proptest::prelude::*;

use rmglab::config::Hyp2Flow;
use rmglab::hyperbolic::Mod2Metric;
use rmglab::numerics::OdeSpec;
use rmglab::rat1::reduced::{h_function, h_lower_bound};
use rmglab::rat1::{energy_and_momenta, evolve, LumpState};
use rmglab::ratn::{PotentialMode, RatnEqGeometry};
use rmglab::rmg_core::{self, ReducedState, Trajectory};
use rmglab::runs::hyp2_field;

fn tight() -> OdeSpec {
    OdeSpec::default().with_tolerances(1e-12, 1e-12)
}

fn hyp2_run(flow: Hyp2Flow, charge: f64, st: ReducedState, t: f64, n: usize) -> Trajectory {
    let surface = Mod2Metric::l2().reduced_surface();
    rmg_core::evolve(&surface, &hyp2_field(flow, charge), st, (0.0, t), &tight(), n).unwrap()
}

fn flow() -> impl Strategy<Value = Hyp2Flow> {
    prop_oneof![Just(Hyp2Flow::Extrinsic), Just(Hyp2Flow::Intrinsic), Just(Hyp2Flow::Geodesic)]
}

fn reduced() -> impl Strategy<Value = ReducedState> {
    (1.0..3.0f64, -3.0..3.0f64, -0.3..0.3f64, -0.3..0.3f64).prop_map(|(s, p, sd, pd)| ReducedState::new(s, p, sd, pd))
}

fn rotation() -> impl Strategy<Value = nalgebra::Matrix3<f64>> {
    (-3.1..3.1f64, -1.5..1.5f64, -3.1..3.1f64).prop_map(|(a, b, c)| Rotation3::from_euler_angles(a, b, c).into_inner())
}

fn vec3(r: f64) -> impl Strategy<Value = Vector3<f64>> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

fn lump() -> impl Strategy<Value = LumpState> {
    (rotation(), vec3(0.5), vec3(2.0), vec3(0.3)).prop_filter_map("λ away from 0", |(o, w, l, ld)| {
        (l.norm() > 0.3).then_some(LumpState {
            o,
            omega: w,
            lambda: l,
            lambda_dot: ld,
        })
    })
}

fn close(a: &ReducedState, b: &ReducedState, tol: f64) -> bool {
    a.to_array().iter().zip(b.to_array()).all(|(x, y)| (x - y).abs() < tol * (1.0 + y.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn reduced_speed_is_conserved(f in flow(), st in reduced(), q in -2.0..2.0f64) {
        let tr = hyp2_run(f, q, st, 20.0, 41);
        prop_assume!(tr.termination.is_completed());
        prop_assert!(tr.speed_drift() < 1e-8, "drift {}", tr.speed_drift());
    }

    #[test]
    fn charge_and_speed_scale_together(st in reduced(), k in 0.5..3.0f64) {
        // γ(kt) solves the flow with charge k when γ solves it with charge 1
        let base = hyp2_run(Hyp2Flow::Extrinsic, 1.0, st, 6.0, 7);
        let fast = ReducedState::new(st.s, st.psi, k * st.s_dot, k * st.psi_dot);
        let scaled = hyp2_run(Hyp2Flow::Extrinsic, k, fast, 6.0 / k, 7);
        prop_assume!(base.termination.is_completed() && scaled.termination.is_completed());
        for (a, b) in base.samples.iter().zip(&scaled.samples) {
            let back = ReducedState::new(b.state.s, b.state.psi, b.state.s_dot / k, b.state.psi_dot / k);
            prop_assert!(close(&back, &a.state, 1e-8));
        }
    }

    #[test]
    fn psi_translation(f in flow(), st in reduced(), shift in -3.0..3.0f64) {
        let a = hyp2_run(f, 1.0, st, 8.0, 5);
        let b = hyp2_run(f, 1.0, ReducedState::new(st.s, st.psi + shift, st.s_dot, st.psi_dot), 8.0, 5);
        prop_assume!(a.termination.is_completed() && b.termination.is_completed());
        for (x, y) in a.samples.iter().zip(&b.samples) {
            let moved = ReducedState::new(x.state.s, x.state.psi + shift, x.state.s_dot, x.state.psi_dot);
            prop_assert!(close(&y.state, &moved, 1e-9));
        }
    }

    #[test]
    fn time_reversal_flips_charge(f in flow(), st in reduced(), q in -2.0..2.0f64) {
        let fwd = hyp2_run(f, q, st, 5.0, 2);
        prop_assume!(fwd.termination.is_completed());
        let end = fwd.samples.last().unwrap().state;
        let rev = ReducedState::new(end.s, end.psi, -end.s_dot, -end.psi_dot);
        let back = hyp2_run(f, -q, rev, 5.0, 2);
        prop_assume!(back.termination.is_completed());
        let e = back.samples.last().unwrap().state;
        let home = ReducedState::new(e.s, e.psi, -e.s_dot, -e.psi_dot);
        prop_assert!(close(&home, &st, 1e-8));
    }

    #[test]
    fn lump_equivariance(st in lump(), left in rotation(), right in rotation()) {
        let spec = tight();
        let a = evolve(&st, (0.0, 2.0), &spec, 2).unwrap();
        let b = evolve(&st.transformed(&left, &right), (0.0, 2.0), &spec, 2).unwrap();
        prop_assume!(a.termination.is_completed() && b.termination.is_completed());
        let expect = a.samples[1].state.transformed(&left, &right).to_vec();
        let got = b.samples[1].state.to_vec();
        for (x, y) in got.iter().zip(&expect) {
            prop_assert!((x - y).abs() < 1e-7, "{x} {y}");
        }
    }

    #[test]
    fn axial_data_stays_axial(o in rotation(), w3 in -0.5..0.5f64, l in 0.5..3.0f64, ld in -0.3..0.3f64) {
        let st = LumpState {
            o,
            omega: Vector3::new(0.0, 0.0, w3),
            lambda: Vector3::new(0.0, 0.0, l),
            lambda_dot: Vector3::new(0.0, 0.0, ld),
        };
        let tr = evolve(&st, (0.0, 5.0), &tight(), 6).unwrap();
        for smp in &tr.samples {
            let s = smp.state;
            let off = s.lambda.xy().norm() + s.lambda_dot.xy().norm() + s.omega.xy().norm();
            prop_assert!(off < 1e-9, "off-axis {off}");
        }
    }

    #[test]
    fn lump_charges_invariant_under_left_rotation(st in lump(), left in rotation()) {
        let a = energy_and_momenta(&st);
        let b = energy_and_momenta(&st.transformed(&left, &nalgebra::Matrix3::identity()));
        prop_assert!((a.e - b.e).abs() < 1e-12 * (1.0 + a.e.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn h_is_nonnegative(l in vec3(50.0), ld in vec3(5.0)) {
        prop_assume!(l.norm() > 1e-3);
        let h = h_function(&l, &ld).unwrap();
        let lower = h_lower_bound(&l, &ld).unwrap();
        prop_assert!(h >= 0.0);
        prop_assert!(h >= lower * (1.0 - 1e-12));
    }

    #[test]
    fn metric_inversion(n in 2u32..6, rho in 0.05..1.0f64) {
        let g = RatnEqGeometry::new(n).unwrap();
        let f = g.f_j(n as usize, rho).unwrap();
        let f_inv = g.f_j(n as usize, 1.0 / rho).unwrap();
        prop_assert!((f_inv - rho.powi(4) * f).abs() < 1e-9 * f_inv, "{f_inv} {}", rho.powi(4) * f);
    }

    #[test]
    fn potential_mirror(n in 2u32..5, chi in 0.05..1.0f64, p in -3.0..3.0f64, intrinsic in any::<bool>()) {
        let mode = if intrinsic { PotentialMode::Intrinsic } else { PotentialMode::Extrinsic };
        let g = RatnEqGeometry::new(n).unwrap();
        let kappa = 2.0 * g.potential(1.0, mode).unwrap();
        let a = g.effective_potential(p, chi, mode).unwrap();
        let b = g.effective_potential(-kappa - p, 1.0 / chi, mode).unwrap();
        prop_assert!((a - b).abs() < 1e-8 * a.abs().max(1.0), "{a} {b}");
    }
}

#[test]
fn mirror_constants_for_degree_two() {
    let g = RatnEqGeometry::new(2).unwrap();
    for (mode, kappa) in [(PotentialMode::Extrinsic, 10.0), (PotentialMode::Intrinsic, 2.0)] {
        for chi in [0.1, 0.4, 0.9] {
            let s = g.potential(chi, mode).unwrap() + g.potential(1.0 / chi, mode).unwrap();
            assert!((s - kappa).abs() < 1e-9, "{mode:?}: {s}");
        }
    }
}

#[test]
fn mirror_trajectories() {
    let g = RatnEqGeometry::new(2).unwrap();
    let spec = tight();
    for mode in [PotentialMode::Extrinsic, PotentialMode::Intrinsic] {
        let kappa = 2.0 * g.potential(1.0, mode).unwrap();
        let (p, chi0, chi_dot0) = (0.3, 0.6, -0.2);
        let (a, _) = g.launch(mode, p, chi0, Some(chi_dot0), 4.0, &spec, 9).unwrap();
        let (b, _) = g
            .launch(mode, -kappa - p, 1.0 / chi0, Some(-chi_dot0 / (chi0 * chi0)), 4.0, &spec, 9)
            .unwrap();
        assert!(a.termination.is_completed() && b.termination.is_completed());
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert!((x.state.s * y.state.s - 1.0).abs() < 1e-8, "{mode:?} t={}", x.t);
            assert!((x.state.psi + y.state.psi).abs() < 1e-8, "{mode:?} t={}", x.t);
        }
    }
}
