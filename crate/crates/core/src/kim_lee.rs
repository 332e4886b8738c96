//! Kim–Lee effective magnetic field for Euclidean two-vortices.

use std::f64::consts::PI;
use std::path::Path;

use crate::numerics::finite_diff;

#[derive(Debug, thiserror::Error)]
pub enum KimLeeError {
    #[error("separation sigma = {0} must be positive")]
    NonpositiveSeparation(f64),
    #[error("modulus |w| = {0} must be positive")]
    NonpositiveModulus(f64),
    #[error("sigma = {sigma} outside table range [{lo}, {hi}]")]
    OutsideTable { sigma: f64, lo: f64, hi: f64 },
    #[error("bad profile table: {0}")]
    BadTable(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Natural cubic spline through (x_i, y_i).
#[derive(Clone, Debug)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self, KimLeeError> {
        let n = x.len();
        if n < 3 || y.len() != n {
            return Err(KimLeeError::BadTable("need at least 3 rows".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(KimLeeError::BadTable("sigma must be strictly increasing".into()));
        }
        // tridiagonal solve for second derivatives, m_0 = m_{n-1} = 0
        let mut m = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            let diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
            c[i] = h1 / diag;
            d[i] = (rhs - h0 * d[i - 1]) / diag;
        }
        for i in (1..n - 1).rev() {
            m[i] = d[i] - c[i] * m[i + 1];
        }
        Ok(CubicSpline { x, y, m })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// (value, first derivative) at `t`, which must lie in range.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let n = self.x.len();
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let v = a * self.y[i] + b * self.y[i + 1] + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let dv = (self.y[i + 1] - self.y[i]) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        (v, dv)
    }
}

#[derive(Clone, Debug)]
pub enum BProfile {
    /// b(σ) = 1/σ − σ/2.
    TruncatedAsymptotic,
    UserTable(CubicSpline),
}

impl BProfile {
    /// Reads a two-column `sigma,b` CSV. Lines starting with `#` and a
    /// non-numeric header are skipped.
    pub fn from_csv(path: &Path) -> Result<Self, KimLeeError> {
        let text = std::fs::read_to_string(path)?;
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 2 {
                return Err(KimLeeError::BadTable(format!("line {}: expected 2 columns", lineno + 1)));
            }
            match (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
                (Ok(x), Ok(y)) => {
                    xs.push(x);
                    ys.push(y);
                }
                _ if xs.is_empty() => continue,
                _ => return Err(KimLeeError::BadTable(format!("line {}: not numeric", lineno + 1))),
            }
        }
        Ok(BProfile::UserTable(CubicSpline::new(xs, ys)?))
    }

    /// (b(σ), b'(σ)).
    pub fn b(&self, sigma: f64) -> Result<(f64, f64), KimLeeError> {
        if !(sigma > 0.0) {
            return Err(KimLeeError::NonpositiveSeparation(sigma));
        }
        match self {
            BProfile::TruncatedAsymptotic => Ok((1.0 / sigma - 0.5 * sigma, -1.0 / (sigma * sigma) - 0.5)),
            BProfile::UserTable(sp) => {
                let (lo, hi) = sp.range();
                if sigma < lo || sigma > hi {
                    return Err(KimLeeError::OutsideTable { sigma, lo, hi });
                }
                Ok(sp.eval(sigma))
            }
        }
    }

    /// −2σb + σ²b'/2, whose derivative gives f.
    fn h(&self, sigma: f64) -> Result<f64, KimLeeError> {
        let (b, bp) = self.b(sigma)?;
        Ok(-2.0 * sigma * b + 0.5 * sigma * sigma * bp)
    }
}

/// dθ components of the two one-forms: (2πκ[1 − σb], (π/2)κσ²b').
pub fn one_form_coefficients(profile: &BProfile, kappa: f64, sigma: f64) -> Result<(f64, f64), KimLeeError> {
    let (b, bp) = profile.b(sigma)?;
    Ok((2.0 * PI * kappa * (1.0 - sigma * b), 0.5 * PI * kappa * sigma * sigma * bp))
}

/// f(σ) = (πκ/σ) d/dσ(−2σb + σ²b'/2).
pub fn effective_field_f(profile: &BProfile, kappa: f64, sigma: f64) -> Result<f64, KimLeeError> {
    let hp = match profile {
        BProfile::TruncatedAsymptotic => {
            if !(sigma > 0.0) {
                return Err(KimLeeError::NonpositiveSeparation(sigma));
            }
            // −2σb + σ²b'/2 = −5/2 + 3σ²/4
            return Ok(1.5 * PI * kappa);
        }
        BProfile::UserTable(sp) => {
            profile.h(sigma)?;
            let (lo, hi) = sp.range();
            let step = 1e-3 * (hi - lo).min(sigma - lo).min(hi - sigma).max(1e-12 * (hi - lo));
            finite_diff(|x| profile.h(x).unwrap_or(f64::NAN), sigma, 1, step.max(1e-9))
        }
    };
    Ok(PI * kappa / sigma * hp)
}

/// f(√|w|)/|w|, the coefficient of (i/8) dw ∧ dw̄ with w = ζ².
pub fn singular_coefficient(profile: &BProfile, kappa: f64, w_abs: f64) -> Result<f64, KimLeeError> {
    if !(w_abs > 0.0) {
        return Err(KimLeeError::NonpositiveModulus(w_abs));
    }
    Ok(effective_field_f(profile, kappa, w_abs.sqrt())? / w_abs)
}

pub const FIELD_HEADER: &str = "sigma,f,a1_coef,a2_coef";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_field_is_constant() {
        let p = BProfile::TruncatedAsymptotic;
        for &s in &[0.01, 0.2, 0.5, 1.0] {
            assert_eq!(effective_field_f(&p, 1.0, s).unwrap(), 1.5 * PI);
        }
        assert_eq!(effective_field_f(&p, 0.0, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn truncated_one_forms() {
        let p = BProfile::TruncatedAsymptotic;
        let (k, s) = (0.7, 0.4);
        let (a1, a2) = one_form_coefficients(&p, k, s).unwrap();
        assert!((a1 - PI * k * s * s).abs() < 1e-14);
        assert!((a2 + 0.5 * PI * k * (1.0 + 0.5 * s * s)).abs() < 1e-14);
    }

    #[test]
    fn blow_up_is_first_order() {
        let p = BProfile::TruncatedAsymptotic;
        let v = singular_coefficient(&p, 1.0, 1e-4).unwrap();
        assert!((v - 1.5 * PI * 1e4).abs() < 1e-8);
        let r = singular_coefficient(&p, 1.0, 1e-5).unwrap() / v;
        assert!((r - 10.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive() {
        let p = BProfile::TruncatedAsymptotic;
        assert!(matches!(effective_field_f(&p, 1.0, 0.0), Err(KimLeeError::NonpositiveSeparation(_))));
        assert!(matches!(singular_coefficient(&p, 1.0, -1.0), Err(KimLeeError::NonpositiveModulus(_))));
    }

    #[test]
    fn spline_reproduces_truncated_profile() {
        let xs: Vec<f64> = (0..400).map(|i| 0.2 + i as f64 * 0.002).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| 1.0 / x - 0.5 * x).collect();
        let p = BProfile::UserTable(CubicSpline::new(xs, ys).unwrap());
        let f = effective_field_f(&p, 1.0, 0.5).unwrap();
        assert!((f - 1.5 * PI).abs() < 1e-3, "{f}");
        assert!(p.b(0.1).is_err());
    }

    #[test]
    fn spline_exact_on_lines() {
        let sp = CubicSpline::new(vec![0.0, 1.0, 3.0, 4.0], vec![1.0, 3.0, 7.0, 9.0]).unwrap();
        let (v, d) = sp.eval(2.2);
        assert!((v - 5.4).abs() < 1e-14 && (d - 2.0).abs() < 1e-14);
    }
}
