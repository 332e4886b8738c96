//! Large-λ behaviour of F₁, F₂, F₃ and the lower bound on Z(λ, θ).
//!
//! For the large-λ work the F_i are rewritten with t = 2 asinh λ:
//!   A = 2π e^{-t} a(t),  B = 2π e^{-2t} b(t),
//!   a = [1 − e^{-4t} − 4t e^{-2t}]/(1 − e^{-2t})³,
//!   b = [(t − 1) + (t + 1) e^{-2t}]/(1 − e^{-2t})³,
//! and d/du = (λΛ)⁻¹ d/dt, so that F_i/λ⁴ never forms e^{±t}.

use std::f64::consts::{LN_2, PI};

use serde::Serialize;

use crate::numerics::{extrapolate_to_zero, Jet};

type J = Jet<3>;

/// Exact coefficients of the three expansions in x = 1/log λ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoefficientTable {
    pub a: [f64; 3],
    pub b: [f64; 3],
    /// c₃ as printed.
    pub c: [f64; 3],
    /// c₃ from second-order matching.
    pub c3_corrected: f64,
}

impl CoefficientTable {
    pub fn new() -> Self {
        let l = LN_2;
        CoefficientTable {
            a: [4.0 / PI, 2.0 / PI * (1.0 - 2.0 * l), (1.0 - 4.0 * l + 4.0 * l * l) / PI],
            b: [16.0 / PI, 2.0 / PI * (3.0 - 8.0 * l), (2.0 - 12.0 * l + 16.0 * l * l) / PI],
            c: [16.0 / PI, 4.0 / PI * (1.0 - 4.0 * l), (1.0 - 32.0 * l + 64.0 * l * l) / PI],
            c3_corrected: (0.25 - 8.0 * l + 16.0 * l * l) / PI,
        }
    }

    /// Symbolic forms, same order as the fields.
    pub fn expressions() -> [(&'static str, &'static str); 10] {
        [
            ("a1", "4/pi"),
            ("a2", "(2/pi)(1 - 2 log 2)"),
            ("a3", "(1/pi)(1 - 4 log 2 + 4 log^2 2)"),
            ("b1", "16/pi"),
            ("b2", "(2/pi)(3 - 8 log 2)"),
            ("b3", "(1/pi)(2 - 12 log 2 + 16 log^2 2)"),
            ("c1", "16/pi"),
            ("c2", "(4/pi)(1 - 4 log 2)"),
            ("c3", "(1/pi)(1 - 32 log 2 + 64 log^2 2)"),
            ("c3_corrected", "(1/pi)(1/4 - 8 log 2 + 16 log^2 2)"),
        ]
    }

    /// The table with c₃ replaced by the corrected value.
    pub fn corrected(&self) -> Self {
        let mut t = *self;
        t.c[2] = self.c3_corrected;
        t
    }

    /// (α₁, α₂, α₃) at x.
    pub fn alphas(&self, x: f64) -> [f64; 3] {
        let (a, b, c) = (self.a, self.b, self.c);
        [
            4.0 * (a[0] + a[1] * x + a[2] * x * x),
            2.0 * (b[1] - 4.0 * a[1]) * x + 2.0 * (b[2] - 4.0 * a[2]) * x * x,
            (4.0 * a[2] - 2.0 * b[2] + c[2]) * x * x,
        ]
    }

    pub fn tau_star(&self, x: f64) -> f64 {
        let al = self.alphas(x);
        -0.5 * al[1] / al[0]
    }

    /// P_x(τ*(x)) = −(α₂² − 4α₁α₃)/(4α₁).
    pub fn px_tau_star(&self, x: f64) -> f64 {
        let al = self.alphas(x);
        -(al[1] * al[1] - 4.0 * al[0] * al[2]) / (4.0 * al[0])
    }

    /// P_x(τ) = α₁τ² + α₂τ + α₃.
    pub fn px(&self, x: f64, tau: f64) -> f64 {
        let al = self.alphas(x);
        al[0] * tau * tau + al[1] * tau + al[2]
    }

    /// Second x-derivative of P_x(τ*(x)) at 0, printed form
    /// −[(b₂ − 4a₂)² − 16a₁(4a₃ − 2b₃ + c₃)]/(8a₁).
    pub fn d2_printed(&self) -> f64 {
        let (a, b, c) = (self.a, self.b, self.c);
        -((b[1] - 4.0 * a[1]).powi(2) - 16.0 * a[0] * (4.0 * a[2] - 2.0 * b[2] + c[2])) / (8.0 * a[0])
    }

    /// The same derivative taken from P_x(τ*) directly:
    /// −[(b₂ − 4a₂)² − 4a₁(4a₃ − 2b₃ + c₃)]/(2a₁).
    pub fn d2_exact(&self) -> f64 {
        let (a, b, c) = (self.a, self.b, self.c);
        -((b[1] - 4.0 * a[1]).powi(2) - 4.0 * a[0] * (4.0 * a[2] - 2.0 * b[2] + c[2])) / (2.0 * a[0])
    }

    /// Z₀(λ, θ)·log λ/λ⁴ from the truncated expansions.
    pub fn z0_scaled(&self, lambda: f64, theta: f64) -> f64 {
        let x = 1.0 / lambda.ln();
        let ct = theta.cos();
        let (a, b, c) = (self.a, self.b, self.c);
        let k = |i: usize| 4.0 * a[i] * ct * ct + 2.0 * b[i] * ct + c[i];
        k(0) + k(1) * x + k(2) * x * x
    }
}

impl Default for CoefficientTable {
    fn default() -> Self {
        CoefficientTable::new()
    }
}

/// (log a)' and (log b)' in t.
fn log_derivs(t: f64) -> (f64, f64) {
    let tj = J::variable(t);
    let e2 = (tj * -2.0).exp();
    let d = (1.0 - e2).powi(3);
    let a = (1.0 - e2.sqr() - tj * e2 * 4.0) / d;
    let b = ((tj - 1.0) + (tj + 1.0) * e2) / d;
    (a.ln().derivative(1), b.ln().derivative(1))
}

/// (F₁, F₂, F₃)/λ⁴ for λ ≥ 1, stable for arbitrarily large λ.
pub fn f123_scaled(lambda: f64) -> [f64; 3] {
    let t = 2.0 * lambda.asinh();
    let u = lambda * lambda;
    let (la, lb) = log_derivs(t);
    let lna = la - 1.0; // (log A)'
    let lnb = lb - 2.0; // (log B)'
    let b_small = {
        let e2 = (-2.0 * t).exp();
        ((t - 1.0) + (t + 1.0) * e2) / (1.0 - e2).powi(3)
    };
    // 1/(B λ⁴) = e^{2t}/(2π b λ⁴) with e^{t/2} = λ + Λ
    let inv_b = (1.0 + (1.0 + 1.0 / u).sqrt()).powi(4) / (2.0 * PI * b_small);
    let s = 2.0 * lna + lnb; // −λΛĀ
    [
        // λΛ/(1+2λ²) without overflow
        -2.0 * (1.0 + lambda.recip().powi(2)).sqrt() / (2.0 + lambda.recip().powi(2)) * lna * inv_b,
        -s * inv_b,
        0.25 * s * s * inv_b,
    ]
}

/// Z(λ, θ)/λ⁴ = [4F₁cos²θ + 2F₂cosθ + F₃]/λ⁴ (‖Q‖ = 2).
pub fn z_scaled(lambda: f64, theta: f64) -> f64 {
    let [f1, f2, f3] = f123_scaled(lambda);
    let c = theta.cos();
    4.0 * f1 * c * c + 2.0 * f2 * c + f3
}

/// Unconstrained minimum over cos θ of Z(λ, θ), equal to Λ²Ā²/(4A₄),
/// together with the minimizing τ = 1 + cos θ.
pub fn z_exact_min(lambda: f64) -> (f64, f64) {
    let t = 2.0 * lambda.asinh();
    let u = lambda * lambda;
    let cap = (1.0 + u).sqrt();
    let (la, lb) = log_derivs(t);
    let lna = la - 1.0;
    let s = 2.0 * lna + lb - 2.0;
    // A_t = A (log A)' with A = 2π e^{-t} a; e^{-t} = (λ + Λ)^{-2}
    let a_small = {
        let e2 = (-2.0 * t).exp();
        (1.0 - e2 * e2 - 4.0 * t * e2) / (1.0 - e2).powi(3)
    };
    let a_t = 2.0 * PI * a_small / (lambda + cap).powi(2) * lna;
    let min = s * s / (2.0 * lambda * cap * a_t);
    let [f1, f2, _] = f123_scaled(lambda);
    (min, 1.0 - f2 / (4.0 * f1))
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub x: f64,
    pub lambda: f64,
    /// (F_i log λ/λ⁴ − k₁ − k₂x − k₃x²)/x³ for i = 1, 2, 3.
    pub residual: [f64; 3],
}

/// Residuals of the three expansions at the given x = 1/log λ.
pub fn convergence_table(table: &CoefficientTable, xs: &[f64]) -> Vec<ConvergenceRow> {
    xs.iter()
        .map(|&x| {
            let lambda = (1.0 / x).exp();
            let f = f123_scaled(lambda);
            let mut residual = [0.0; 3];
            for (i, k) in [table.a, table.b, table.c].iter().enumerate() {
                residual[i] = (f[i] / x - k[0] - k[1] * x - k[2] * x * x) / x.powi(3);
            }
            ConvergenceRow { x, lambda, residual }
        })
        .collect()
}

/// Leading coefficients estimated by a polynomial fit of F_i log λ/λ⁴ in x.
pub fn fit_leading_coefficients(xs: &[f64], degree: usize) -> Option<[f64; 3]> {
    let mut out = [0.0; 3];
    for (i, slot) in out.iter_mut().enumerate() {
        let ys: Vec<f64> = xs.iter().map(|&x| f123_scaled((1.0 / x).exp())[i] / x).collect();
        *slot = extrapolate_to_zero(xs, &ys, degree)?;
    }
    Some(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaScan {
    /// inf of Z (log λ)³/λ⁴ over the grid with λ ≥ λ₀; None if never positive.
    pub c0: Option<f64>,
    pub lambda0: Option<f64>,
    /// Row minima over θ, per grid λ.
    pub row_minima: Vec<(f64, f64)>,
    /// Exact continuous minimum over θ at each grid λ (not grid-limited).
    pub exact_minima: Vec<(f64, f64)>,
}

/// Grid scan of Z(λ, θ)(log λ)³/λ⁴ with ‖Q‖ = 2.
pub fn lemma_bound_scan(lambda_grid: &[f64], theta_grid: &[f64]) -> LemmaScan {
    let row_minima: Vec<(f64, f64)> = lambda_grid
        .iter()
        .map(|&l| {
            let lg = l.ln();
            let m = theta_grid
                .iter()
                .map(|&th| z_scaled(l, th) * lg.powi(3))
                .fold(f64::INFINITY, f64::min);
            (l, m)
        })
        .collect();
    let exact_minima = lambda_grid
        .iter()
        .map(|&l| {
            let (m, tau) = z_exact_min(l);
            let v = if (0.0..=2.0).contains(&tau) {
                m / l.powi(4) * l.ln().powi(3)
            } else {
                // minimizer outside the admissible range: use the endpoints
                z_scaled(l, 0.0).min(z_scaled(l, PI)) * l.ln().powi(3)
            };
            (l, v)
        })
        .collect();
    // smallest λ₀ whose tail infimum is positive
    let mut suffix = f64::INFINITY;
    let mut c0 = None;
    let mut lambda0 = None;
    for &(l, m) in row_minima.iter().rev() {
        suffix = suffix.min(m);
        if suffix > 0.0 {
            c0 = Some(suffix);
            lambda0 = Some(l);
        } else {
            break;
        }
    }
    LemmaScan {
        c0,
        lambda0,
        row_minima,
        exact_minima,
    }
}

pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1).max(1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat1::reduced::f123;

    #[test]
    fn leading_coefficients() {
        let t = CoefficientTable::new();
        assert!((t.a[0] - 4.0 / PI).abs() < 1e-15);
        assert!((t.b[0] - 16.0 / PI).abs() < 1e-15);
        assert!((t.c[0] - 16.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn scaled_matches_direct() {
        for &l in &[1.0, 3.0, 40.0, 1e3] {
            let d = f123(l).unwrap();
            let s = f123_scaled(l);
            for i in 0..3 {
                let v = s[i] * l.powi(4);
                assert!(((v - d[i]) / d[i]).abs() < 1e-10, "λ={l} i={i}: {v} {}", d[i]);
            }
        }
    }

    #[test]
    fn z_at_pi() {
        let l = 1e5;
        let [f1, f2, f3] = f123_scaled(l);
        assert!((z_scaled(l, PI) - (4.0 * f1 - 2.0 * f2 + f3)).abs() < 1e-12 * f1);
    }

    #[test]
    fn printed_d2_and_exact_d2() {
        let t = CoefficientTable::new();
        assert!(t.d2_printed() > 0.0);
        assert!((t.d2_printed() - 4.6879).abs() < 1e-3, "{}", t.d2_printed());
        assert!(t.corrected().d2_exact().abs() < 1e-13);
    }

    #[test]
    fn px_tau_star_is_second_order() {
        let t = CoefficientTable::new();
        assert!(t.px_tau_star(0.0).abs() < 1e-15);
        let h = 1e-3;
        let d1 = (t.px_tau_star(h) - t.px_tau_star(-h)) / (2.0 * h);
        assert!(d1.abs() < 1e-6);
        let d2 = (t.px_tau_star(h) - 2.0 * t.px_tau_star(0.0) + t.px_tau_star(-h)) / (h * h);
        assert!((d2 - t.d2_exact()).abs() < 1e-4);
    }

    #[test]
    fn exact_min_is_below_endpoints() {
        let l = 1e6;
        let (m, tau) = z_exact_min(l);
        assert!(m < 0.0);
        let x = 1.0 / l.ln();
        assert!((tau / x - 0.125).abs() < 0.02, "{}", tau / x);
    }
}
