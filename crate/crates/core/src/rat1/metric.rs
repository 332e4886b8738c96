//! L² metric functions on Rat₁ and the Ricci potential coefficient.
//!
//! Everything is a function of u = λ². With t = 2 asinh λ (so μ = e^t),
//!   A = π (sinh 2t − 2t) / (2 sinh³ t),
//!   B = (π/2)(t cosh t − sinh t) / sinh³ t,
//! both even and analytic in t. Near u = 0 they are summed as power series
//! in T = t², which is itself a power series in u; elsewhere the exponential
//! form in e^{-t} is used so nothing overflows for large λ.

use std::f64::consts::PI;

use serde::Serialize;

use crate::numerics::{quad_adaptive, Jet, NumericsError, QuadratureSpec};

type J = Jet<5>;

/// Below this value of u = λ² the series branch is used.
pub const SERIES_CUTOFF_U: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Rat1Error {
    #[error("radius λ = {0} must be non-negative")]
    NegativeRadius(f64),
    #[error("radius λ = {0} must be positive here")]
    ZeroRadius(f64),
    #[error("mass matrix is singular at λ = {0}")]
    SingularMassMatrix(f64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

fn t_squared_coeffs() -> [f64; 44] {
    // 4 asinh²(√u) = 2 Σ (−1)^{n+1} (4u)^n / (n² C(2n, n))
    let mut c = [0.0; 44];
    let mut r = 2.0; // 4^n / C(2n, n) at n = 1
    for (n, slot) in c.iter_mut().enumerate().skip(1) {
        let nf = n as f64;
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        *slot = 2.0 * sign * r / (nf * nf);
        r *= 2.0 * (nf + 1.0) / (2.0 * nf + 1.0);
    }
    c
}

/// Series in T = t² of (sinh 2t − 2t)/t³, sinh t / t and (t cosh t − sinh t)/t³.
fn t_series() -> ([f64; 24], [f64; 24], [f64; 24]) {
    let (mut p, mut s, mut q) = ([0.0; 24], [0.0; 24], [0.0; 24]);
    let mut fact = 1.0; // (2k+1)!
    let mut pow4 = 1.0; // 4^k
    for k in 0..24 {
        let kf = k as f64;
        if k > 0 {
            fact *= (2.0 * kf) * (2.0 * kf + 1.0);
            pow4 *= 4.0;
        }
        s[k] = 1.0 / fact;
        let fact3 = fact * (2.0 * kf + 2.0) * (2.0 * kf + 3.0);
        p[k] = 8.0 * pow4 / fact3;
        q[k] = 2.0 * (kf + 1.0) / fact3;
    }
    (p, s, q)
}

/// Jets in u of (A, B).
fn a_b_jets(u: f64) -> (J, J) {
    let uj = J::variable(u);
    if u < SERIES_CUTOFF_U {
        let tt = uj.series(&t_squared_coeffs());
        let (p, s, q) = t_series();
        let s3 = tt.series(&s).powi(3);
        (tt.series(&p) / s3 * (0.5 * PI), tt.series(&q) / s3 * (0.5 * PI))
    } else {
        let t = uj.sqrt().asinh() * 2.0;
        let e = (-t).exp();
        let e2 = e.sqr();
        let d = (1.0 - e2).powi(3);
        let a = (e * (1.0 - e2.sqr()) - t * e * e2 * 4.0) / d * (2.0 * PI);
        let b = ((t - 1.0) * e2 + (t + 1.0) * e2.sqr()) / d * (2.0 * PI);
        (a, b)
    }
}

/// Metric data at one radius, with first u-derivatives where the
/// equations of motion need them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rat1Point {
    pub lambda: f64,
    pub u: f64,
    pub mu: f64,
    pub cap_lambda: f64,
    pub a: f64,
    /// dA/dλ.
    pub a_prime: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub abar: f64,
    pub b: f64,
    /// Λ·Ā.
    pub lam_abar: f64,
    /// A₁ + λ²A₂ = 4B/Λ², evaluated without cancellation.
    pub radial: f64,
    pub a1_u: f64,
    pub a2_u: f64,
    pub a3_u: f64,
    pub a4_u: f64,
    pub a5_u: f64,
    pub lam_abar_u: f64,
}

/// Rat₁ metric evaluation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Rat1Metric;

impl Rat1Metric {
    pub fn at(&self, lambda: f64) -> Result<Rat1Point, Rat1Error> {
        if !(lambda >= 0.0) {
            return Err(Rat1Error::NegativeRadius(lambda));
        }
        Ok(self.at_u(lambda * lambda))
    }

    /// Evaluation in terms of u = λ² ≥ 0.
    pub fn at_u(&self, u: f64) -> Rat1Point {
        let (a, b) = a_b_jets(u);
        let au = a.deriv();
        let uj = J::variable(u);
        let a2 = a / (uj + 1.0) + au * 2.0;
        let a3 = (uj * 2.0 + 1.0) * a * 0.25;
        let a4 = (uj + 1.0) * au * 0.5;
        let abar = -((au / a) * 2.0 + b.deriv() / b);
        let la = (uj + 1.0).sqrt() * abar;
        let lambda = u.sqrt();
        Rat1Point {
            lambda,
            u,
            mu: (lambda + (1.0 + u).sqrt()).powi(2),
            cap_lambda: (1.0 + u).sqrt(),
            a: a.value(),
            a_prime: 2.0 * lambda * au.value(),
            a1: a.value(),
            a2: a2.value(),
            a3: a3.value(),
            a4: a4.value(),
            a5: a.value(),
            abar: abar.value(),
            b: b.value(),
            lam_abar: la.value(),
            radial: 4.0 * b.value() / (1.0 + u),
            a1_u: au.value(),
            a2_u: a2.derivative(1),
            a3_u: a3.derivative(1),
            a4_u: a4.derivative(1),
            a5_u: au.value(),
            lam_abar_u: la.derivative(1),
        }
    }

    /// (A, A₁, A₂, A₃, A₄, A₅, Ā, B).
    pub fn metric_functions(&self, lambda: f64) -> Result<[f64; 8], Rat1Error> {
        let p = self.at(lambda)?;
        Ok([p.a, p.a1, p.a2, p.a3, p.a4, p.a5, p.abar, p.b])
    }

    /// The μ-form 2πμ[μ⁴ − 4μ² log μ − 1]/(μ² − 1)³, for comparison away from λ = 0.
    pub fn a_mu_form(lambda: f64) -> f64 {
        let mu = (lambda + (1.0 + lambda * lambda).sqrt()).powi(2);
        let m2 = mu * mu;
        2.0 * PI * mu * (m2 * m2 - 4.0 * m2 * mu.ln() - 1.0) / (m2 - 1.0).powi(3)
    }

    /// Length of the ray (I₃, (0, 0, s)), 0 ≤ s ≤ λ_max.
    pub fn radial_length(&self, lambda_max: f64, spec: &QuadratureSpec) -> Result<f64, Rat1Error> {
        if !(lambda_max > 0.0) {
            return Err(Rat1Error::ZeroRadius(lambda_max));
        }
        let f = |l: f64| self.radial_integrand(l);
        // integrate in log λ past 1 so the 1/λ² decay costs nothing
        let head = quad_adaptive(f, 0.0, lambda_max.min(1.0), spec)?;
        if lambda_max <= 1.0 {
            return Ok(head);
        }
        let tail = quad_adaptive(
            |v: f64| {
                let l = v.exp();
                f(l) * l
            },
            0.0,
            lambda_max.ln(),
            spec,
        )?;
        Ok(head + tail)
    }

    /// √(A₁ + λ²A₂) = 2√B/Λ.
    pub fn radial_integrand(&self, lambda: f64) -> f64 {
        let p = self.at_u(lambda * lambda);
        p.radial.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_origin() {
        let p = Rat1Metric.at(0.0).unwrap();
        assert_eq!(p.mu, 1.0);
        assert!((p.a - 2.0 * PI / 3.0).abs() < 1e-15);
        assert!((p.b - PI / 6.0).abs() < 1e-15);
        assert!((Rat1Metric.radial_integrand(0.0) - (2.0 * PI / 3.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn matches_mu_form() {
        for &l in &[0.3, 0.49, 0.51, 1.0, 7.0, 40.0] {
            let a = Rat1Metric.at(l).unwrap().a;
            let b = Rat1Metric::a_mu_form(l);
            assert!(((a - b) / b).abs() < 1e-12, "λ={l}: {a} {b}");
        }
    }

    #[test]
    fn branches_agree_at_cutoff() {
        let lo = Rat1Metric.at_u(SERIES_CUTOFF_U * (1.0 - 1e-12));
        let hi = Rat1Metric.at_u(SERIES_CUTOFF_U);
        for (x, y) in [
            (lo.a, hi.a),
            (lo.b, hi.b),
            (lo.a2, hi.a2),
            (lo.a4_u, hi.a4_u),
            (lo.lam_abar, hi.lam_abar),
            (lo.lam_abar_u, hi.lam_abar_u),
        ] {
            assert!(((x - y) / y).abs() < 1e-10, "{x} {y}");
        }
    }

    #[test]
    fn b_identity() {
        for &l in &[0.0, 0.2, 0.8, 3.0, 50.0] {
            let p = Rat1Metric.at(l).unwrap();
            // the naive sums cancel by a factor of about A₃/B
            let tol = 1e-14 * (p.a3 / p.b).max(100.0);
            let b = p.a3 + l * l * p.a4;
            assert!(((b - p.b) / p.b).abs() < tol, "λ={l}");
            let r = p.a1 + l * l * p.a2;
            assert!(((r - p.radial) / p.radial).abs() < tol, "λ={l}");
        }
    }

    #[test]
    fn large_lambda_decay() {
        let p = Rat1Metric.at(1e4).unwrap();
        assert!((p.a * 1e8 - PI / 2.0).abs() < 1e-6);
        let p = Rat1Metric.at(1e40).unwrap();
        assert!(p.a.is_finite() && p.b > 0.0 && p.abar.is_finite());
    }

    #[test]
    fn abar_against_finite_difference() {
        use crate::numerics::finite_diff;
        let l0 = 1.3;
        let lab = |l: f64| {
            let p = Rat1Metric.at(l).unwrap();
            (p.a * p.a * p.b).ln()
        };
        let expect = -finite_diff(lab, l0, 1, 1e-3) / (2.0 * l0);
        let got = Rat1Metric.at(l0).unwrap().abar;
        assert!((got - expect).abs() < 1e-9, "{got} {expect}");
    }

    #[test]
    fn negative_radius_rejected() {
        assert!(matches!(Rat1Metric.at(-0.1), Err(Rat1Error::NegativeRadius(_))));
    }
}
