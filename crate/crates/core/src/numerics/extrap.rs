//! Least-squares polynomial extrapolation to x = 0.

use nalgebra::{DMatrix, DVector};

/// Fits y ≈ c0 + c1 x + ... + c_deg x^deg and returns the coefficients.
pub fn poly_fit(xs: &[f64], ys: &[f64], degree: usize) -> Option<Vec<f64>> {
    let m = xs.len();
    if m != ys.len() || m < degree + 1 {
        return None;
    }
    // Column scaling keeps the Vandermonde system well conditioned.
    let xmax = xs.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(f64::MIN_POSITIVE);
    let a = DMatrix::from_fn(m, degree + 1, |i, j| (xs[i] / xmax).powi(j as i32));
    let b = DVector::from_column_slice(ys);
    let sol = a.svd(true, true).solve(&b, 1e-15).ok()?;
    Some((0..=degree).map(|j| sol[j] / xmax.powi(j as i32)).collect())
}

/// Value of the least-squares fit at x = 0.
pub fn extrapolate_to_zero(xs: &[f64], ys: &[f64], degree: usize) -> Option<f64> {
    poly_fit(xs, ys, degree).map(|c| c[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_quadratic() {
        let xs = [0.1, 0.05, 0.025, 0.0125];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 3.0 * x + 0.5 * x * x).collect();
        let c = poly_fit(&xs, &ys, 2).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-12 && (c[1] + 3.0).abs() < 1e-10);
    }
}
