//! Closed-form anchors and frozen regression constants.

use std::f64::consts::PI;

use nalgebra::Complex;
use rmglab::hyperbolic::{embed, hyperbolic_distance, Mod2Metric};
use rmglab::kim_lee::{effective_field_f, singular_coefficient, BProfile};
use rmglab::numerics::QuadratureSpec;
use rmglab::rat1::asymptotics::{convergence_table, lemma_bound_scan, log_grid, CoefficientTable};
use rmglab::rat1::Rat1Metric;
use rmglab::ratn::RatnEqGeometry;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn hyperbolic_anchors() {
    let m = Mod2Metric::l2();
    assert!(rel(m.a(0.0).unwrap(), 32.0 * PI) < 1e-12);
    assert!(rel(m.a(40.0).unwrap() / 40f64.exp(), 6.0 * PI) < 1e-6);
    assert!(rel(m.ricci_c(30.0).unwrap() / 30f64.exp(), -2.0) < 1e-6);
}

#[test]
fn embedded_pair_is_at_distance_s() {
    for s in [0.1, 1.0, 4.0] {
        let pair = embed(s, 0.7).unwrap();
        let d = hyperbolic_distance(pair.xi1, pair.xi2);
        assert!((d - s).abs() < 1e-10, "{s}: {d}");
    }
    let z = Complex::new(0.3, 2.0);
    assert!(hyperbolic_distance(z, z).abs() < 1e-14);
}

#[test]
fn kim_lee_truncated_profile() {
    let p = BProfile::TruncatedAsymptotic;
    for kappa in [0.5, 1.0, 2.0] {
        for sigma in [0.01, 0.2, 0.5] {
            let f = effective_field_f(&p, kappa, sigma).unwrap();
            assert!(rel(f, 1.5 * PI * kappa) < 1e-12);
        }
    }
    let v = singular_coefficient(&p, 1.0, 1e-4).unwrap();
    assert!(rel(v, 1.5 * PI * 1e4) < 1e-9, "{v}");
}

#[test]
fn rat1_metric_anchors() {
    let p = Rat1Metric.at(0.0).unwrap();
    assert!(rel(p.a, 2.0 * PI / 3.0) < 1e-14);
    let p = Rat1Metric.at(1e4).unwrap();
    assert!(rel(p.a * 1e8, PI / 2.0) < 1e-6);
    assert!(rel(Rat1Metric.radial_integrand(0.0), (2.0 * PI / 3.0).sqrt()) < 1e-14);
}

#[test]
fn radial_length_limit() {
    let spec = QuadratureSpec {
        rel_tol: 1e-13,
        ..QuadratureSpec::default()
    };
    let l3 = Rat1Metric.radial_length(1e3, &spec).unwrap();
    let l6 = Rat1Metric.radial_length(1e6, &spec).unwrap();
    let l12 = Rat1Metric.radial_length(1e12, &spec).unwrap();
    assert!(l6 - l3 < 3e-4 && l6 > l3);
    assert!(l12 - l6 < 1e-5);
    // regression constant, from quadrature
    assert!((l12 - 1.630_811_932_019_711).abs() < 1e-10, "{l12}");
}

#[test]
fn coefficient_table_values() {
    let t = CoefficientTable::new();
    assert!(rel(t.a[0], 4.0 / PI) < 1e-15);
    assert!(rel(t.b[0], 16.0 / PI) < 1e-15);
    assert!(rel(t.c[0], 16.0 / PI) < 1e-15);
}

#[test]
fn third_order_residuals_stay_bounded() {
    let xs = [0.1, 0.05, 0.025, 0.0125];
    let t = CoefficientTable::new();
    let printed = convergence_table(&t, &xs);
    let corrected = convergence_table(&t.corrected(), &xs);
    for (r, c) in printed.iter().zip(&corrected) {
        assert!(r.residual[0].abs() < 1.0 && r.residual[1].abs() < 1.0);
        assert!(c.residual[2].abs() < 1.0);
    }
    // with c₃ as printed the F₃ residual grows like 1/x
    let growth = printed[3].residual[2] / printed[0].residual[2];
    assert!(growth > 7.0, "{growth}");
}

#[test]
fn lemma_scan_frozen() {
    let thetas: Vec<f64> = (0..721).map(|k| PI * k as f64 / 720.0).collect();
    let scan = lemma_bound_scan(&log_grid(1e2, 1e12, 201), &thetas);
    let c0 = scan.c0.unwrap();
    let l0 = scan.lambda0.unwrap();
    assert!(c0 > 0.0);
    // regression constant for this grid
    assert!((l0 - 281.8383).abs() < 1e-3, "{l0}");
}

#[test]
fn ratn_small_radius_limits() {
    let g = RatnEqGeometry::new(2).unwrap();
    assert!(rel(g.f_metric(1e-6).unwrap(), PI * PI) < 1e-6);
    assert!(rel(g.eta(2, 1e-6).unwrap(), PI / 4.0) < 1e-6);
}

#[test]
fn regularity_constants() {
    let g = RatnEqGeometry::new(5).unwrap();
    let r = g.regularity_check(0.3).unwrap();
    assert!(rel(r.const1, 24.0) < 5e-3, "{}", r.const1);
    assert!(rel(r.const2, -192.0) < 5e-3, "{}", r.const2);
}

#[test]
fn chi_f2_limit() {
    let report = RatnEqGeometry::new(2).unwrap().limits_report().unwrap();
    let l = report.get("chi_F2").unwrap();
    assert!(rel(l.estimate, 4.0 * PI) < 1e-2, "{}", l.estimate);
}
