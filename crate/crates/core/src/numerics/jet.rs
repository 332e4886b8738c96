//! Truncated Taylor series arithmetic (forward-mode AD to arbitrary order).
//!
//! A `Jet<N>` stores normalised Taylor coefficients `c[k] = f^(k)(x0) / k!`
//! of a function of one variable about a base point.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<const N: usize> {
    pub c: [f64; N],
}

impl<const N: usize> Jet<N> {
    pub fn constant(x: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = x;
        Jet { c }
    }

    /// The independent variable at `x`.
    pub fn variable(x: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = x;
        if N > 1 {
            c[1] = 1.0;
        }
        Jet { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// k-th derivative at the base point.
    pub fn derivative(&self, k: usize) -> f64 {
        let mut fact = 1.0;
        for i in 2..=k {
            fact *= i as f64;
        }
        self.c[k] * fact
    }

    /// Jet of the derivative. The top coefficient is lost and set to zero.
    pub fn deriv(&self) -> Self {
        let mut c = [0.0; N];
        for k in 0..N.saturating_sub(1) {
            c[k] = (k + 1) as f64 * self.c[k + 1];
        }
        Jet { c }
    }

    /// Antiderivative with constant term `c0`. The top input coefficient is dropped.
    pub fn integrate(&self, c0: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = c0;
        for k in 1..N {
            c[k] = self.c[k - 1] / k as f64;
        }
        Jet { c }
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut c = self.c;
        for v in c.iter_mut() {
            *v *= a;
        }
        Jet { c }
    }

    pub fn recip(&self) -> Self {
        Jet::constant(1.0) / *self
    }

    pub fn sqr(&self) -> Self {
        *self * *self
    }

    pub fn exp(&self) -> Self {
        let mut e = [0.0; N];
        e[0] = self.c[0].exp();
        for k in 1..N {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.c[j] * e[k - j];
            }
            e[k] = s / k as f64;
        }
        Jet { c: e }
    }

    pub fn ln(&self) -> Self {
        let a0 = self.c[0];
        let mut l = [0.0; N];
        l[0] = a0.ln();
        for k in 1..N {
            let mut s = 0.0;
            for j in 1..k {
                s += j as f64 * l[j] * self.c[k - j];
            }
            l[k] = (self.c[k] - s / k as f64) / a0;
        }
        Jet { c: l }
    }

    pub fn sqrt(&self) -> Self {
        let mut r = [0.0; N];
        r[0] = self.c[0].sqrt();
        for k in 1..N {
            let mut s = 0.0;
            for j in 1..k {
                s += r[j] * r[k - j];
            }
            r[k] = (self.c[k] - s) / (2.0 * r[0]);
        }
        Jet { c: r }
    }

    /// Returns (sinh, cosh).
    pub fn sinh_cosh(&self) -> (Self, Self) {
        let mut s = [0.0; N];
        let mut c = [0.0; N];
        s[0] = self.c[0].sinh();
        c[0] = self.c[0].cosh();
        for k in 1..N {
            let (mut ss, mut cc) = (0.0, 0.0);
            for j in 1..=k {
                let w = j as f64 * self.c[j];
                ss += w * c[k - j];
                cc += w * s[k - j];
            }
            s[k] = ss / k as f64;
            c[k] = cc / k as f64;
        }
        (Jet { c: s }, Jet { c })
    }

    pub fn sinh(&self) -> Self {
        self.sinh_cosh().0
    }

    pub fn cosh(&self) -> Self {
        self.sinh_cosh().1
    }

    pub fn tanh(&self) -> Self {
        let (s, c) = self.sinh_cosh();
        s / c
    }

    /// Returns (sin, cos).
    pub fn sin_cos(&self) -> (Self, Self) {
        let mut s = [0.0; N];
        let mut c = [0.0; N];
        s[0] = self.c[0].sin();
        c[0] = self.c[0].cos();
        for k in 1..N {
            let (mut ss, mut cc) = (0.0, 0.0);
            for j in 1..=k {
                let w = j as f64 * self.c[j];
                ss += w * c[k - j];
                cc -= w * s[k - j];
            }
            s[k] = ss / k as f64;
            c[k] = cc / k as f64;
        }
        (Jet { c: s }, Jet { c })
    }

    pub fn asinh(&self) -> Self {
        let r = (self.sqr() + 1.0).sqrt();
        (self.deriv() / r).integrate(self.c[0].asinh())
    }

    pub fn powi(&self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut acc = Jet::constant(1.0);
        let mut base = *self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Evaluates the power series `sum coeffs[k] * self^k` by Horner's rule.
    pub fn series(&self, coeffs: &[f64]) -> Self {
        let mut acc = Jet::constant(0.0);
        for &a in coeffs.iter().rev() {
            acc = acc * *self + a;
        }
        acc
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut c = self.c;
        for k in 0..N {
            c[k] += o.c[k];
        }
        Jet { c }
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut c = self.c;
        for k in 0..N {
            c[k] -= o.c[k];
        }
        Jet { c }
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut c = [0.0; N];
        for i in 0..N {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..N - i {
                c[i + j] += self.c[i] * o.c[j];
            }
        }
        Jet { c }
    }
}

impl<const N: usize> Div for Jet<N> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let mut q = [0.0; N];
        for k in 0..N {
            let mut s = self.c[k];
            for j in 1..=k {
                s -= o.c[j] * q[k - j];
            }
            q[k] = s / o.c[0];
        }
        Jet { c: q }
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const N: usize> Add<f64> for Jet<N> {
    type Output = Self;
    fn add(mut self, a: f64) -> Self {
        self.c[0] += a;
        self
    }
}

impl<const N: usize> Sub<f64> for Jet<N> {
    type Output = Self;
    fn sub(mut self, a: f64) -> Self {
        self.c[0] -= a;
        self
    }
}

impl<const N: usize> Mul<f64> for Jet<N> {
    type Output = Self;
    fn mul(self, a: f64) -> Self {
        self.scale(a)
    }
}

impl<const N: usize> Div<f64> for Jet<N> {
    type Output = Self;
    fn div(self, a: f64) -> Self {
        self.scale(1.0 / a)
    }
}

impl<const N: usize> Add<Jet<N>> for f64 {
    type Output = Jet<N>;
    fn add(self, j: Jet<N>) -> Jet<N> {
        j + self
    }
}

impl<const N: usize> Sub<Jet<N>> for f64 {
    type Output = Jet<N>;
    fn sub(self, j: Jet<N>) -> Jet<N> {
        -j + self
    }
}

impl<const N: usize> Mul<Jet<N>> for f64 {
    type Output = Jet<N>;
    fn mul(self, j: Jet<N>) -> Jet<N> {
        j.scale(self)
    }
}

impl<const N: usize> Div<Jet<N>> for f64 {
    type Output = Jet<N>;
    fn div(self, j: Jet<N>) -> Jet<N> {
        Jet::constant(self) / j
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type J = Jet<6>;

    #[test]
    fn exp_ln_roundtrip() {
        let x = J::variable(0.7);
        let y = x.exp().ln();
        for k in 0..6 {
            assert!((y.c[k] - x.c[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn derivatives_of_sinh() {
        let s = J::variable(0.3).sinh();
        assert!((s.derivative(0) - 0.3f64.sinh()).abs() < 1e-15);
        assert!((s.derivative(1) - 0.3f64.cosh()).abs() < 1e-15);
        assert!((s.derivative(2) - 0.3f64.sinh()).abs() < 1e-14);
        assert!((s.derivative(5) - 0.3f64.cosh()).abs() < 1e-12);
    }

    #[test]
    fn sqrt_and_division() {
        let x = J::variable(2.0);
        let y = x.sqrt() / x;
        // d/dx x^{-1/2} = -1/2 x^{-3/2}
        assert!((y.derivative(1) + 0.5 * 2f64.powf(-1.5)).abs() < 1e-15);
        assert!((y.derivative(2) - 0.75 * 2f64.powf(-2.5)).abs() < 1e-14);
    }

    #[test]
    fn asinh_derivative() {
        let x = J::variable(1.5);
        let y = x.asinh();
        assert!((y.value() - 1.5f64.asinh()).abs() < 1e-15);
        assert!((y.derivative(1) - 1.0 / (1.0 + 2.25f64).sqrt()).abs() < 1e-15);
        let d2 = -1.5 / (1.0 + 2.25f64).powf(1.5);
        assert!((y.derivative(2) - d2).abs() < 1e-14);
    }

    #[test]
    fn sin_cos_identity() {
        let (s, c) = J::variable(0.9).sin_cos();
        let one = s * s + c * c;
        assert!((one.c[0] - 1.0).abs() < 1e-15);
        for k in 1..6 {
            assert!(one.c[k].abs() < 1e-14);
        }
    }

    #[test]
    fn deriv_matches_derivative() {
        let y = J::variable(0.4).exp() * J::variable(0.4).powi(3);
        let d = y.deriv();
        assert!((d.derivative(1) - y.derivative(2)).abs() < 1e-12);
    }
}
