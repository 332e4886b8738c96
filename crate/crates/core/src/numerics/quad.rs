//! Adaptive Gauss–Kronrod quadrature on finite and semi-infinite ranges.

use super::NumericsError;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 0.0,
            rel_tol: 1e-12,
            max_subdivisions: 4000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self, NumericsError> {
        let spec = QuadratureSpec {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        if !(self.abs_tol >= 0.0) || !(self.rel_tol > 0.0) || self.max_subdivisions < 1 {
            return Err(NumericsError::InvalidSpec(format!(
                "quadrature spec abs_tol={} rel_tol={} max_subdivisions={}",
                self.abs_tol, self.rel_tol, self.max_subdivisions
            )));
        }
        Ok(())
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

// 21-point Kronrod extension of the 10-point Gauss rule.
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// One GK21 panel on [a, b]. Returns (integral, error estimate).
pub fn gauss_kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = WGK[10] * fc;
    let mut resg = 0.0;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (1.0f64).min((200.0 * err / resasc).powf(1.5));
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (result, err)
}

/// Adaptive bisection on [a, b] driven by the GK21 error estimate.
pub fn quad_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<f64, NumericsError> {
    spec.validate()?;
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gauss_kronrod21(&f, a, b);
    let mut panels = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    loop {
        if !total.is_finite() {
            return Err(NumericsError::NonConvergence {
                estimate: total,
                error: err,
            });
        }
        if err <= spec.target(total) {
            return Ok(total);
        }
        if panels.len() >= spec.max_subdivisions {
            return Err(NumericsError::NonConvergence {
                estimate: total,
                error: err,
            });
        }
        let (imax, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (pa, pb, pv, pe) = panels.swap_remove(imax);
        let mid = 0.5 * (pa + pb);
        if mid <= pa.min(pb) || mid >= pa.max(pb) {
            // Interval exhausted at machine resolution: accept what we have.
            panels.push((pa, pb, pv, 0.0));
            err -= pe;
            continue;
        }
        let (v1, e1) = gauss_kronrod21(&f, pa, mid);
        let (v2, e2) = gauss_kronrod21(&f, mid, pb);
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        panels.push((pa, mid, v1, e1));
        panels.push((mid, pb, v2, e2));
        // Refresh the running sums occasionally to limit drift.
        if panels.len() % 64 == 0 {
            total = panels.iter().map(|p| p.2).sum();
            err = panels.iter().map(|p| p.3).sum();
        }
    }
}

/// Integral over [0, ∞) through s = t/(1-t).
pub fn quad_semi_infinite<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<f64, NumericsError> {
    quad_tail(f, 0.0, 1.0, spec)
}

/// Integral over [a, ∞) through s = a + scale·t/(1-t).
pub fn quad_tail<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    scale: f64,
    spec: &QuadratureSpec,
) -> Result<f64, NumericsError> {
    let g = |t: f64| {
        let u = 1.0 - t;
        let s = a + scale * t / u;
        let v = f(s);
        if v == 0.0 {
            0.0
        } else {
            v * scale / (u * u)
        }
    };
    quad_adaptive(g, 0.0, 1.0, spec)
}

/// Integral over [0, ∞) for integrands with structure at several scales.
///
/// `scales` must be positive and increasing. The range is cut at each scale;
/// [0, s_0] is integrated directly, [s_i, s_{i+1}] in the variable log s,
/// further subdivided per decade, and the tail past the last scale uses the
/// scaled rational map. Pieces are accumulated against a common tolerance.
pub fn quad_multiscale<F: Fn(f64) -> f64>(
    f: F,
    scales: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64, NumericsError> {
    spec.validate()?;
    if scales.is_empty() {
        return quad_semi_infinite(&f, spec);
    }
    let mut pts: Vec<f64> = Vec::new();
    let mut prev = scales[0];
    pts.push(prev);
    for &s in &scales[1..] {
        if !(s > prev) {
            return Err(NumericsError::InvalidSpec("quadrature scales must increase".into()));
        }
        let decades = (s / prev).log10().ceil().max(1.0) as usize;
        let step = (s / prev).ln() / decades as f64;
        for k in 1..decades {
            pts.push(prev * (step * k as f64).exp());
        }
        pts.push(s);
        prev = s;
    }
    let mut total = quad_adaptive(&f, 0.0, pts[0], spec)?;
    for w in pts.windows(2) {
        let (la, lb) = (w[0].ln(), w[1].ln());
        let g = |v: f64| {
            let s = v.exp();
            f(s) * s
        };
        total += quad_adaptive(g, la, lb, spec)?;
    }
    let last = *pts.last().unwrap();
    total += quad_tail(&f, last, last, spec)?;
    Ok(total)
}

/// One GK21 panel for a vector-valued integrand of dimension `dim`.
/// Writes integrals, error estimates and ∫|f| into the three output slices.
fn gauss_kronrod21_vec<F: Fn(f64, &mut [f64])>(
    f: &F,
    a: f64,
    b: f64,
    dim: usize,
    val: &mut [f64],
    err: &mut [f64],
    mag: &mut [f64],
) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut buf = vec![0.0; dim * 21];
    f(center, &mut buf[0..dim]);
    for j in 0..10 {
        let dx = half * XGK[j];
        let (lo, hi) = buf[dim * (1 + 2 * j)..dim * (3 + 2 * j)].split_at_mut(dim);
        f(center - dx, lo);
        f(center + dx, hi);
    }
    for c in 0..dim {
        let fc = buf[c];
        let mut resk = WGK[10] * fc;
        let mut resg = 0.0;
        let mut resabs = resk.abs();
        for j in 0..10 {
            let f1 = buf[dim * (1 + 2 * j) + c];
            let f2 = buf[dim * (2 + 2 * j) + c];
            resk += WGK[j] * (f1 + f2);
            resabs += WGK[j] * (f1.abs() + f2.abs());
            if j % 2 == 1 {
                resg += WG[j / 2] * (f1 + f2);
            }
        }
        let mean = 0.5 * resk;
        let mut resasc = WGK[10] * (fc - mean).abs();
        for j in 0..10 {
            resasc += WGK[j] * ((buf[dim * (1 + 2 * j) + c] - mean).abs() + (buf[dim * (2 + 2 * j) + c] - mean).abs());
        }
        let resasc = resasc * half.abs();
        let resabs = resabs * half.abs();
        let mut e = ((resk - resg) * half).abs();
        if resasc != 0.0 && e != 0.0 {
            e = resasc * (1.0f64).min((200.0 * e / resasc).powf(1.5));
        }
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            e = e.max(50.0 * f64::EPSILON * resabs);
        }
        val[c] = resk * half;
        err[c] = e;
        mag[c] = resabs;
    }
}

struct VecPanel {
    a: f64,
    b: f64,
    val: Vec<f64>,
    err: Vec<f64>,
    mag: Vec<f64>,
}

impl VecPanel {
    fn new<F: Fn(f64, &mut [f64])>(f: &F, a: f64, b: f64, dim: usize) -> Self {
        let mut p = VecPanel {
            a,
            b,
            val: vec![0.0; dim],
            err: vec![0.0; dim],
            mag: vec![0.0; dim],
        };
        gauss_kronrod21_vec(f, a, b, dim, &mut p.val, &mut p.err, &mut p.mag);
        p
    }
}

/// Adaptive quadrature of a vector integrand over a list of finite pieces
/// sharing one subdivision budget. Component c has converged when its error
/// is below max(abs_tol, rel_tol·max(|I_c|, 1e-3·∫|f_c|)).
fn quad_pieces_vec<F: Fn(f64, &mut [f64])>(
    f: &F,
    pieces: &[(f64, f64)],
    dim: usize,
    spec: &QuadratureSpec,
) -> Result<Vec<f64>, NumericsError> {
    let mut panels: Vec<VecPanel> = pieces.iter().map(|&(a, b)| VecPanel::new(f, a, b, dim)).collect();
    loop {
        let mut total = vec![0.0; dim];
        let mut err = vec![0.0; dim];
        let mut mag = vec![0.0; dim];
        for p in &panels {
            for c in 0..dim {
                total[c] += p.val[c];
                err[c] += p.err[c];
                mag[c] += p.mag[c];
            }
        }
        if total.iter().any(|v| !v.is_finite()) {
            return Err(NumericsError::NonConvergence {
                estimate: total.iter().copied().find(|v| !v.is_finite()).unwrap_or(f64::NAN),
                error: f64::INFINITY,
            });
        }
        let targets: Vec<f64> = (0..dim)
            .map(|c| spec.abs_tol.max(spec.rel_tol * total[c].abs().max(1e-3 * mag[c])))
            .collect();
        // worst component relative to its target
        let (worst, ratio) = (0..dim)
            .map(|c| (c, err[c] / targets[c]))
            .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if ratio <= 1.0 {
            return Ok(total);
        }
        if panels.len() >= spec.max_subdivisions.max(pieces.len()) {
            return Err(NumericsError::NonConvergence {
                estimate: total[worst],
                error: err[worst],
            });
        }
        let (imax, _) = panels
            .iter()
            .enumerate()
            .map(|(i, p)| (i, (0..dim).map(|c| p.err[c] / targets[c]).fold(0.0, f64::max)))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let p = panels.swap_remove(imax);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a.min(p.b) || mid >= p.a.max(p.b) {
            let mut q = p;
            q.err.iter_mut().for_each(|e| *e = 0.0);
            panels.push(q);
            continue;
        }
        panels.push(VecPanel::new(f, p.a, mid, dim));
        panels.push(VecPanel::new(f, mid, p.b, dim));
    }
}

/// Vector-valued counterpart of [`quad_multiscale`]: `f(s, out)` fills `dim`
/// integrand values, all integrated on shared nodes.
pub fn quad_multiscale_vec<F: Fn(f64, &mut [f64])>(
    f: F,
    dim: usize,
    scales: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<f64>, NumericsError> {
    spec.validate()?;
    let mut pts: Vec<f64> = Vec::new();
    for &s in scales {
        if !(s > 0.0) || pts.last().is_some_and(|&p| s <= p) {
            return Err(NumericsError::InvalidSpec("quadrature scales must be positive and increase".into()));
        }
        if let Some(&prev) = pts.last() {
            let decades = (s / prev).log10().ceil().max(1.0) as usize;
            let step = (s / prev).ln() / decades as f64;
            for k in 1..decades {
                pts.push(prev * (step * k as f64).exp());
            }
        }
        pts.push(s);
    }
    if pts.is_empty() {
        pts.push(1.0);
    }
    let (first, last) = (pts[0], *pts.last().unwrap());
    let nlog = pts.len() - 1;
    // piece 0: [0, first] in s; pieces 1..=nlog: log s; final piece: tail map
    let mapped = |v: f64, out: &mut [f64]| {
        let (kind, x) = (v.floor() as i64, v - v.floor());
        let k = kind.clamp(0, nlog as i64 + 1) as usize;
        let x = if kind > nlog as i64 + 1 { 1.0 } else { x };
        if k == 0 {
            f(x * first, out);
            out.iter_mut().for_each(|o| *o *= first);
        } else if k <= nlog {
            let (la, lb) = (pts[k - 1].ln(), pts[k].ln());
            let s = (la + x * (lb - la)).exp();
            f(s, out);
            out.iter_mut().for_each(|o| *o *= s * (lb - la));
        } else {
            let u = 1.0 - x;
            if u <= 0.0 {
                out.iter_mut().for_each(|o| *o = 0.0);
                return;
            }
            let s = last + last * x / u;
            f(s, out);
            let jac = last / (u * u);
            out.iter_mut().for_each(|o| *o = if *o == 0.0 { 0.0 } else { *o * jac });
        }
    };
    let pieces: Vec<(f64, f64)> = (0..nlog + 2).map(|k| (k as f64, k as f64 + 1.0)).collect();
    // keep each piece's endpoints inside its own index
    let shrink = |(a, b): (f64, f64)| (a, b - (b * f64::EPSILON).max(f64::MIN_POSITIVE));
    let pieces: Vec<(f64, f64)> = pieces.into_iter().map(shrink).collect();
    quad_pieces_vec(&mapped, &pieces, dim, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn closed_form_examples() {
        let spec = QuadratureSpec::default();
        let a = quad_semi_infinite(|s| 1.0 / (1.0 + s).powi(2), &spec).unwrap();
        assert!((a - 1.0).abs() < 1e-12);
        let b = quad_semi_infinite(|s| s / (1.0 + s * s).powi(2), &spec).unwrap();
        assert!((b - 0.5).abs() < 1e-12);
        let c = quad_semi_infinite(|s| 1.0 / (1.0 + s * s).powi(2), &spec).unwrap();
        assert!((c - PI / 4.0).abs() / (PI / 4.0) < 1e-12);
    }

    #[test]
    fn kronrod_exact_for_polynomials() {
        let (v, _) = gauss_kronrod21(&|x: f64| x.powi(20) + 3.0 * x.powi(7), -1.0, 1.0);
        assert!((v - 2.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn multiscale_agrees_with_plain() {
        let spec = QuadratureSpec::default();
        let f = |s: f64| 1.0 / ((1.0 + s) * (1.0 + s / 1e6)).powi(2) * (1.0 + s);
        let a = quad_multiscale(f, &[1.0, 1e6], &spec).unwrap();
        // ∫ 1/((1+s)(1+εs)^2) ds with ε = 1e-6, closed form
        let e: f64 = 1e-6;
        let exact = (1.0 / (1.0 - e)) * (-(e.ln()) / (1.0 - e) - 1.0);
        assert!(((a - exact) / exact).abs() < 1e-10, "{a} vs {exact}");
    }

    #[test]
    fn reports_nonconvergence() {
        let spec = QuadratureSpec::new(0.0, 1e-14, 3).unwrap();
        let r = quad_adaptive(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, &spec);
        assert!(matches!(r, Err(NumericsError::NonConvergence { .. })));
    }

    #[test]
    fn vector_multiscale_matches_scalar() {
        let spec = QuadratureSpec::default();
        let e: f64 = 1e-6;
        let g = |s: f64, out: &mut [f64]| {
            out[0] = 1.0 / ((1.0 + s) * (1.0 + e * s).powi(2));
            out[1] = 1.0 / (1.0 + s).powi(2);
            out[2] = s / (1.0 + s * s).powi(2);
        };
        let v = quad_multiscale_vec(g, 3, &[1.0, 1e6], &spec).unwrap();
        let exact = (1.0 / (1.0 - e)) * (-(e.ln()) / (1.0 - e) - 1.0);
        assert!(((v[0] - exact) / exact).abs() < 1e-10);
        assert!((v[1] - 1.0).abs() < 1e-11);
        assert!((v[2] - 0.5).abs() < 1e-11);
    }

    #[test]
    fn rejects_bad_spec() {
        assert!(QuadratureSpec::new(0.0, 0.0, 10).is_err());
        assert!(QuadratureSpec::new(0.0, 1e-8, 0).is_err());
    }
}
