//! Central finite differences with one Richardson step.

fn central(f: &dyn Fn(f64) -> f64, x: f64, order: u8, h: f64) -> f64 {
    match order {
        1 => (f(x + h) - f(x - h)) / (2.0 * h),
        2 => (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
        3 => (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h),
        _ => f64::NAN,
    }
}

/// Derivative of order 1, 2 or 3 at `x` with base step `h`.
///
/// Combines the central stencils at `h` and `h/2`, cancelling the h² term.
/// Returns NaN for an unsupported order.
pub fn finite_diff<F: Fn(f64) -> f64>(f: F, x: f64, order: u8, h: f64) -> f64 {
    let d1 = central(&f, x, order, h);
    let d2 = central(&f, x, order, 0.5 * h);
    (4.0 * d2 - d1) / 3.0
}
