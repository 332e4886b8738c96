//! L² geometry of hyperbolic two-vortices on the centred submanifold.
//!
//! Everything derives from the generating function A(s) through
//! y(s) = A(s)/cosh(s/2). Derivatives are taken with Taylor jets.

use std::f64::consts::PI;

use nalgebra::Complex;
use serde::Serialize;

use crate::numerics::Jet;
use crate::rmg_core::{MagneticCoefficient, RadialKahlerSurface, SurfaceCoeffs};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HyperbolicError {
    #[error("separation s = {0} must be non-negative")]
    NegativeSeparation(f64),
    #[error("separation s = {0} must be positive here")]
    ZeroSeparation(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldMode {
    /// Ambient Ricci form restricted to the submanifold (F|).
    Restricted,
    /// Ricci form of the induced metric (F⁰).
    Intrinsic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricCoefficients {
    pub a: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

/// Below this separation F| and F⁰ use their cubic small-s asymptotics.
pub const SERIES_CUTOFF: f64 = 1e-3;

/// The metric family determined by A(s), optionally shifted by the
/// integration constant c·cosh(s/2) of the general solution (c = 0 is L²).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Mod2Metric {
    pub integration_constant: f64,
}

impl Default for Mod2Metric {
    fn default() -> Self {
        Mod2Metric::l2()
    }
}

type J = Jet<6>;

/// sinh(x)/x, by its Taylor series near zero.
fn sinhc(x: J) -> J {
    if x.value().abs() > 0.5 {
        return x.sinh() / x;
    }
    let mut coeffs = [0.0; 10];
    let mut f = 1.0;
    for (k, c) in coeffs.iter_mut().enumerate() {
        if k > 0 {
            f *= ((2 * k) * (2 * k + 1)) as f64;
        }
        *c = 1.0 / f;
    }
    x.sqr().series(&coeffs)
}

impl Mod2Metric {
    pub fn l2() -> Self {
        Mod2Metric {
            integration_constant: 0.0,
        }
    }

    pub fn with_integration_constant(c: f64) -> Self {
        Mod2Metric {
            integration_constant: c,
        }
    }

    /// g(s) with y(s) = A(s)/cosh(s/2) = 32π + c + s⁴ g(s).
    fn g_jet(&self, s: f64) -> J {
        let x = J::variable(s);
        let ch = (x * 0.5).cosh();
        let r2 = sinhc(x * 0.5) * 0.5;
        let r4 = sinhc(x * 0.25) * 0.25;
        let q = x.powi(4) * r2.powi(4) / ch.sqr();
        let root = (q + 1.0).sqrt();
        32.0 * PI * r4.powi(4) / ch + 16.0 * PI * r2.powi(4) / ch.sqr() / (root + 1.0)
    }

    /// y(s) = A(s)/cosh(s/2) as a jet, written without cancellation near 0.
    fn y_jet(&self, s: f64) -> J {
        let x = J::variable(s);
        x.powi(4) * self.g_jet(s) + 32.0 * PI + self.integration_constant
    }

    /// w(s) = y'(s)/s³ = 4g + s g'.
    fn w_jet(&self, s: f64) -> J {
        let g = self.g_jet(s);
        g * 4.0 + J::variable(s) * g.deriv()
    }

    fn check(s: f64) -> Result<(), HyperbolicError> {
        if s < 0.0 || s.is_nan() {
            Err(HyperbolicError::NegativeSeparation(s))
        } else {
            Ok(())
        }
    }

    fn check_positive(s: f64) -> Result<(), HyperbolicError> {
        Self::check(s)?;
        if s == 0.0 {
            Err(HyperbolicError::ZeroSeparation(s))
        } else {
            Ok(())
        }
    }

    /// A(s), defined for s ≥ 0.
    pub fn a(&self, s: f64) -> Result<f64, HyperbolicError> {
        Self::check(s)?;
        Ok(self.y_jet(s).value() * (0.5 * s).cosh())
    }

    /// A'(s).
    pub fn a_prime(&self, s: f64) -> Result<f64, HyperbolicError> {
        Self::check(s)?;
        let ch = (J::variable(s) * 0.5).cosh();
        Ok((self.y_jet(s) * ch).derivative(1))
    }

    /// The textbook expression 8π(1 + cosh² + 2√(cosh² + sinh⁴)) + c cosh.
    pub fn a_direct(&self, s: f64) -> f64 {
        let (sh, ch) = ((0.5 * s).sinh(), (0.5 * s).cosh());
        8.0 * PI * (1.0 + ch * ch + 2.0 * (ch * ch + sh.powi(4)).sqrt()) + self.integration_constant * ch
    }

    /// (A, A₁, A₂, A₃, A₄); A₁ and A₃ need s > 0.
    pub fn metric_coefficients(&self, s: f64) -> Result<MetricCoefficients, HyperbolicError> {
        Self::check_positive(s)?;
        let y = self.y_jet(s);
        let (sh, ch) = ((0.5 * s).sinh(), (0.5 * s).cosh());
        let yp = y.derivative(1);
        let a = y.value() * ch;
        Ok(MetricCoefficients {
            a,
            a1: yp / (8.0 * sh),
            a2: a,
            a3: 2.0 * sh * yp,
            a4: a / (ch * ch),
        })
    }

    /// A₄ = A/cosh²(s/2), also at s = 0.
    pub fn a4(&self, s: f64) -> Result<f64, HyperbolicError> {
        Self::check(s)?;
        Ok(self.y_jet(s).value() / (0.5 * s).cosh())
    }

    /// A₁ from its independent closed form (L² metric only).
    pub fn a1_closed_form(s: f64) -> f64 {
        let (sh, ch) = ((0.5 * s).sinh(), (0.5 * s).cosh());
        let th = (0.5 * s).tanh();
        let r = ch / (sh * sh);
        0.5 * PI * th * th * (1.0 + 2.0 * (ch * ch + 1.0) / (sh * sh) / (r * r + 1.0).sqrt())
    }

    /// Same closed form in the variable tanh(s/4).
    pub fn a1_closed_form_quarter(s: f64) -> f64 {
        let t = (0.25 * s).tanh();
        let t2 = t * t;
        let t4 = t2 * t2;
        2.0 * PI * t2 / (1.0 + t2).powi(2) * (1.0 + 4.0 * (1.0 + t4) / (1.0 + t4 * t4 + 14.0 * t4).sqrt())
    }

    /// Jet of A₁ = y'/(8 sinh(s/2)).
    fn a1_jet(&self, s: f64) -> J {
        let sh = (J::variable(s) * 0.5).sinh();
        self.y_jet(s).deriv() / (sh * 8.0)
    }

    /// Jet of C(s).
    fn c_jet(&self, s: f64) -> J {
        let x = J::variable(s);
        let (sh, ch) = (x * 0.5).sinh_cosh();
        let y = self.y_jet(s);
        // log(A1 A2 / cosh²) = log A1 + log y − log cosh
        let l = self.a1_jet(s).ln() + y.ln() - ch.ln();
        -(sh * ch * l.deriv()) * 4.0 - ch.sqr() * 8.0
    }

    /// Ricci function C(s).
    pub fn ricci_c(&self, s: f64) -> Result<f64, HyperbolicError> {
        Self::check_positive(s)?;
        Ok(self.c_jet(s).value())
    }

    /// C(s)/(2 cosh(s/2)); its derivative is the restricted field.
    pub fn ricci_potential(&self, s: f64) -> Result<f64, HyperbolicError> {
        Self::check_positive(s)?;
        Ok(self.c_jet(s).value() / (2.0 * (0.5 * s).cosh()))
    }

    /// C₁(s) = (C/cosh(s/2))'/(8 sinh(s/2)), the ds² Ricci coefficient.
    pub fn ricci_c1(&self, s: f64) -> Result<f64, HyperbolicError> {
        Self::check_positive(s)?;
        let (sh, ch) = (J::variable(s) * 0.5).sinh_cosh();
        Ok((self.c_jet(s) / ch).derivative(1) / (8.0 * sh.value()))
    }

    /// Potential of F⁰: −2 sinh(s/2)(log y')' − cosh(s/2), with the
    /// 3/s pole of (log y')' taken out by hand.
    fn a0_jet(&self, s: f64) -> J {
        let h = J::variable(s) * 0.5;
        let (sh, ch) = h.sinh_cosh();
        -sinhc(h) * 3.0 - sh * self.w_jet(s).ln().deriv() * 2.0 - ch
    }

    /// Potential of F|: a⁰ − 2 sinh(s/2)(log(A/cosh²))' − 2cosh(s/2).
    fn ar_jet(&self, s: f64) -> J {
        let (sh, ch) = (J::variable(s) * 0.5).sinh_cosh();
        let l = self.y_jet(s).ln() - ch.ln();
        self.a0_jet(s) - sh * l.deriv() * 2.0 - ch * 2.0
    }

    /// Potential a(s) with a' = F for the chosen mode (no factor 2 applied).
    pub fn magnetic_potential(&self, s: f64, mode: FieldMode) -> Result<f64, HyperbolicError> {
        Self::check_positive(s)?;
        Ok(match mode {
            FieldMode::Intrinsic => self.a0_jet(s).value(),
            FieldMode::Restricted => self.ar_jet(s).value(),
        })
    }

    /// F|(s) or F⁰(s).
    pub fn magnetic_f(&self, s: f64, mode: FieldMode) -> Result<f64, HyperbolicError> {
        Self::check_positive(s)?;
        if s < SERIES_CUTOFF && self.integration_constant == 0.0 {
            return Ok(match mode {
                FieldMode::Restricted => -s.powi(3) / 5.0,
                FieldMode::Intrinsic => 7.0 * s.powi(3) / 40.0,
            });
        }
        Ok(match mode {
            FieldMode::Intrinsic => self.a0_jet(s).derivative(1),
            FieldMode::Restricted => self.ar_jet(s).derivative(1),
        })
    }

    /// The centred-pair surface A₁ ds² + A₃ dψ² on (0, ∞).
    pub fn reduced_surface(&self) -> RadialKahlerSurface {
        let m = *self;
        RadialKahlerSurface::new("hyperbolic_m20", (0.0, f64::INFINITY), move |s| {
            let y1 = m.y_jet(s).deriv();
            let (sh, _) = (J::variable(s) * 0.5).sinh_cosh();
            let a1 = y1 / (sh * 8.0);
            let a3 = sh * y1 * 2.0;
            SurfaceCoeffs {
                a1: a1.value(),
                a1p: a1.derivative(1),
                a3: a3.value(),
                a3p: a3.derivative(1),
            }
        })
    }

    /// F| for the extrinsic flow, 2F⁰ for the intrinsic flow, times `charge`.
    pub fn field(&self, mode: FieldMode, charge: f64) -> MagneticCoefficient {
        let m = *self;
        match mode {
            FieldMode::Restricted => MagneticCoefficient::new(
                "F_restricted",
                move |s| m.magnetic_f(s, FieldMode::Restricted).unwrap_or(f64::NAN),
                charge,
            )
            .with_potential(move |s| m.magnetic_potential(s, FieldMode::Restricted).unwrap_or(f64::NAN)),
            FieldMode::Intrinsic => MagneticCoefficient::new(
                "2F_intrinsic",
                move |s| 2.0 * m.magnetic_f(s, FieldMode::Intrinsic).unwrap_or(f64::NAN),
                charge,
            )
            .with_potential(move |s| 2.0 * m.magnetic_potential(s, FieldMode::Intrinsic).unwrap_or(f64::NAN)),
        }
    }

    /// One row of the profile dump.
    pub fn profile_row(&self, s: f64) -> Result<[f64; 9], HyperbolicError> {
        let c = self.metric_coefficients(s)?;
        Ok([
            s,
            c.a,
            c.a1,
            c.a2,
            c.a3,
            c.a4,
            self.ricci_c(s)?,
            self.magnetic_f(s, FieldMode::Restricted)?,
            self.magnetic_f(s, FieldMode::Intrinsic)?,
        ])
    }
}

pub const PROFILE_HEADER: &str = "s,A,A1,A2,A3,A4,C,F_restricted,F_intrinsic";

/// Vortex positions in the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfPlanePair {
    pub xi1: Complex<f64>,
    pub xi2: Complex<f64>,
}

/// Möbius action of [[a, b], [c, d]].
pub fn mobius(m: [[f64; 2]; 2], z: Complex<f64>) -> Complex<f64> {
    (z * m[0][0] + m[0][1]) / (z * m[1][0] + m[1][1])
}

/// exp(ψ e₂) = [[cos ψ, sin ψ], [−sin ψ, cos ψ]], rotation about i.
pub fn rotation(psi: f64) -> [[f64; 2]; 2] {
    let (s, c) = psi.sin_cos();
    [[c, s], [-s, c]]
}

/// Pair at separation s rotated by ψ about i.
pub fn embed(s: f64, psi: f64) -> Result<HalfPlanePair, HyperbolicError> {
    Mod2Metric::check(s)?;
    let r = rotation(psi);
    let w1 = Complex::new(0.0, (0.5 * s).exp());
    let w2 = Complex::new(0.0, (-0.5 * s).exp());
    Ok(HalfPlanePair {
        xi1: mobius(r, w1),
        xi2: mobius(r, w2),
    })
}

/// Cayley transform of the upper half-plane onto the unit disk.
pub fn disk_map(z: Complex<f64>) -> Complex<f64> {
    (z - Complex::new(0.0, 1.0)) / (z + Complex::new(0.0, 1.0))
}

/// Distance for the curvature −1 metric (dx² + dy²)/y².
pub fn hyperbolic_distance(z: Complex<f64>, w: Complex<f64>) -> f64 {
    let d2 = (z - w).norm_sqr();
    let arg = 1.0 + d2 / (2.0 * z.im * w.im);
    // acosh(1 + x) computed stably for small x
    let x = arg - 1.0;
    (x + (x * (x + 2.0)).sqrt()).ln_1p()
}

/// The so(2,1) basis used for the coframe.
pub fn lie_basis() -> [[[i64; 2]; 2]; 3] {
    [[[0, 1], [1, 0]], [[0, 1], [-1, 0]], [[1, 0], [0, -1]]]
}

pub fn commutator(a: [[i64; 2]; 2], b: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    let mul = |x: [[i64; 2]; 2], y: [[i64; 2]; 2]| {
        let mut r = [[0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
            }
        }
        r
    };
    let (p, q) = (mul(a, b), mul(b, a));
    [[p[0][0] - q[0][0], p[0][1] - q[0][1]], [p[1][0] - q[1][0], p[1][1] - q[1][1]]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_at_coincidence() {
        let m = Mod2Metric::l2();
        assert!((m.a(0.0).unwrap() - 32.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn stable_form_matches_direct_form() {
        let m = Mod2Metric::with_integration_constant(0.7);
        for &s in &[0.0, 0.01, 0.3, 2.0, 9.0, 25.0] {
            let (a, b) = (m.a(s).unwrap(), m.a_direct(s));
            assert!(((a - b) / b).abs() < 1e-14, "s={s}: {a} {b}");
        }
    }

    #[test]
    fn negative_separation_rejected() {
        assert!(matches!(Mod2Metric::l2().a(-1.0), Err(HyperbolicError::NegativeSeparation(_))));
        assert!(Mod2Metric::l2().ricci_c(0.0).is_err());
    }

    #[test]
    fn embedding_base_point() {
        let p = embed(1.2, 0.0).unwrap();
        assert!((p.xi1 - Complex::new(0.0, 0.6f64.exp())).norm() < 1e-15);
        assert!((p.xi2 - Complex::new(0.0, (-0.6f64).exp())).norm() < 1e-15);
    }

    #[test]
    fn commutators_close() {
        let [e1, e2, e3] = lie_basis();
        let neg = |m: [[i64; 2]; 2]| [[-m[0][0], -m[0][1]], [-m[1][0], -m[1][1]]];
        assert_eq!(commutator(e1, e2), neg(e3).map(|r| r.map(|v| 2 * v)));
    }

    #[test]
    fn a1_three_ways() {
        let m = Mod2Metric::l2();
        for &s in &[0.05, 0.5, 1.7, 4.0, 12.0] {
            let a1 = m.metric_coefficients(s).unwrap().a1;
            let b = Mod2Metric::a1_closed_form(s);
            let c = Mod2Metric::a1_closed_form_quarter(s);
            assert!(((a1 - b) / b).abs() < 1e-11, "s={s} {a1} {b}");
            assert!(((a1 - c) / c).abs() < 1e-11, "s={s} {a1} {c}");
        }
    }

    #[test]
    fn large_separation_growth() {
        let m = Mod2Metric::l2();
        assert!((m.a(40.0).unwrap() / 40f64.exp() - 6.0 * PI).abs() < 1e-10);
        assert!((m.ricci_c(30.0).unwrap() / 30f64.exp() + 2.0).abs() < 1e-6);
    }

    #[test]
    fn intrinsic_field_root() {
        let m = Mod2Metric::l2();
        let f = |s| m.magnetic_f(s, FieldMode::Intrinsic).unwrap();
        let root = crate::numerics::find_root(f, (1.0, 3.0), 1e-14).unwrap();
        assert!((root - 1.708_646_435_996_798_3).abs() < 1e-10, "{root}");
    }

    #[test]
    fn restricted_field_value() {
        let f = Mod2Metric::l2().magnetic_f(2.0, FieldMode::Restricted).unwrap();
        assert!((f + 1.59944).abs() < 5e-5, "{f}");
    }

    #[test]
    fn restricted_field_is_ricci_exact() {
        let m = Mod2Metric::l2();
        for &s in &[0.1, 1.0, 2.0, 6.0] {
            let f = m.magnetic_f(s, FieldMode::Restricted).unwrap();
            let c1 = 4.0 * (0.5 * s).sinh() * m.ricci_c1(s).unwrap();
            let dp = crate::numerics::finite_diff(|x| m.ricci_potential(x).unwrap(), s, 1, 1e-3);
            assert!((f - c1).abs() < 1e-9 * (1.0 + f.abs()), "s={s} {f} {c1}");
            assert!((f - dp).abs() < 1e-7 * (1.0 + f.abs()), "s={s} {f} {dp}");
        }
    }

    #[test]
    fn series_branch_is_continuous() {
        let m = Mod2Metric::l2();
        for mode in [FieldMode::Restricted, FieldMode::Intrinsic] {
            let lo = m.magnetic_f(SERIES_CUTOFF * (1.0 - 1e-9), mode).unwrap();
            let hi = m.magnetic_f(SERIES_CUTOFF * (1.0 + 1e-9), mode).unwrap();
            assert!(((lo - hi) / hi).abs() < 1e-4, "{mode:?} {lo} {hi}");
        }
    }

    #[test]
    fn embedding_distance() {
        for &(s, psi) in &[(0.3, 0.0), (2.0, 1.1), (5.0, -2.4)] {
            let p = embed(s, psi).unwrap();
            assert!((hyperbolic_distance(p.xi1, p.xi2) - s).abs() < 1e-12);
            let (d1, d2) = (disk_map(p.xi1), disk_map(p.xi2));
            assert!((d1 + d2).norm() < 1e-12, "centred about the origin");
        }
    }
}
