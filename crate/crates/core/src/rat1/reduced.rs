//! Ω-eliminated energy and its pieces H, G, F₁, F₂, F₃.

use nalgebra::Vector3;

use super::metric::{Rat1Error, Rat1Metric, Rat1Point};

fn point_positive(lambda: f64) -> Result<Rat1Point, Rat1Error> {
    if !(lambda > 0.0) {
        return Err(Rat1Error::ZeroRadius(lambda));
    }
    Rat1Metric.at(lambda)
}

/// Energy with Ω eliminated in favour of the conserved P and Q.
pub fn reduced_energy(
    l: &Vector3<f64>,
    ld: &Vector3<f64>,
    p: &Vector3<f64>,
    q: &Vector3<f64>,
) -> Result<f64, Rat1Error> {
    let mp = point_positive(l.norm())?;
    let u = mp.u;
    let ql = q.dot(l);
    let la = mp.lam_abar;
    Ok(0.5
        * (mp.a1 * ld.norm_squared() + mp.a2 * l.dot(ld).powi(2) + p.norm_squared() / mp.a3
            - mp.a1 * mp.a1 / (4.0 * mp.a3) * ld.cross(l).norm_squared()
            + la / mp.a3 * ql
            - mp.a4 / (mp.a3 * mp.b) * (ql + 0.5 * u * la).powi(2)
            + u * la * la / (4.0 * mp.a3)))
}

/// H(λ, λ̇) in the form with A and A′.
pub fn h_function(l: &Vector3<f64>, ld: &Vector3<f64>) -> Result<f64, Rat1Error> {
    let mp = point_positive(l.norm())?;
    let (u, c2) = (mp.u, 1.0 + mp.u);
    let n = l / mp.lambda;
    let radial = ld.dot(&n);
    Ok(c2 * mp.a / (1.0 + 2.0 * u) * ld.norm_squared()
        + u * ((2.0 + 3.0 * u) / ((1.0 + 2.0 * u) * c2) * mp.a + mp.a_prime / mp.lambda) * radial * radial)
}

/// Lower bound Λ²A/(1+2λ²)·‖λ̂ × λ̇‖².
pub fn h_lower_bound(l: &Vector3<f64>, ld: &Vector3<f64>) -> Result<f64, Rat1Error> {
    let mp = point_positive(l.norm())?;
    let n = l / mp.lambda;
    Ok((1.0 + mp.u) * mp.a / (1.0 + 2.0 * mp.u) * n.cross(ld).norm_squared())
}

/// (F₁, F₂, F₃) at radius λ > 0.
pub fn f123(lambda: f64) -> Result<[f64; 3], Rat1Error> {
    let mp = point_positive(lambda)?;
    let u = mp.u;
    // 1 − λ²A₄/B = A₃/B
    Ok([
        -u * mp.a4 / (mp.a3 * mp.b),
        lambda * mp.lam_abar / mp.b,
        u * mp.lam_abar * mp.lam_abar / (4.0 * mp.b),
    ])
}

/// F₂ exactly as printed, λΛĀ/A₃·(1 − λ²A₄/B).
pub fn f2_printed(lambda: f64) -> Result<f64, Rat1Error> {
    let mp = point_positive(lambda)?;
    Ok(lambda * mp.lam_abar / mp.a3 * (1.0 - mp.u * mp.a4 / mp.b))
}

/// G(λ, Q) = F₁ q² + F₂ q + F₃ with q = Q·λ̂.
pub fn g_function(l: &Vector3<f64>, q: &Vector3<f64>) -> Result<f64, Rat1Error> {
    let lam = l.norm();
    let [f1, f2, f3] = f123(lam)?;
    let qh = q.dot(l) / lam;
    Ok(f1 * qh * qh + f2 * qh + f3)
}

/// Predicted large-λ limit of (log λ/λ⁴)·G.
pub fn g_limit(q_dot_lhat: f64) -> f64 {
    4.0 / std::f64::consts::PI * (q_dot_lhat + 2.0).powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat1::dynamics::{energy_and_momenta, LumpState};

    fn st() -> LumpState {
        LumpState {
            o: nalgebra::Rotation3::from_euler_angles(0.3, -1.2, 2.0).into_inner(),
            omega: Vector3::new(-0.4, 0.9, 0.2),
            lambda: Vector3::new(1.5, -0.3, 0.8),
            lambda_dot: Vector3::new(0.1, 0.4, -0.6),
        }
    }

    #[test]
    fn reduced_energy_matches() {
        let s = st();
        let c = energy_and_momenta(&s);
        let e = reduced_energy(&s.lambda, &s.lambda_dot, &c.p_vec(), &c.q_vec()).unwrap();
        assert!(((e - c.e) / c.e).abs() < 1e-12, "{e} {}", c.e);
    }

    #[test]
    fn energy_split() {
        let s = st();
        let c = energy_and_momenta(&s);
        let mp = Rat1Metric.at(s.lambda.norm()).unwrap();
        let h = h_function(&s.lambda, &s.lambda_dot).unwrap();
        let g = g_function(&s.lambda, &c.q_vec()).unwrap();
        let two_e = h + c.p_vec().norm_squared() / mp.a3 + g;
        assert!(((two_e - 2.0 * c.e) / c.e).abs() < 1e-12);
    }

    #[test]
    fn f2_forms_agree() {
        for &l in &[0.2, 2.0, 30.0] {
            let a = f123(l).unwrap()[1];
            let b = f2_printed(l).unwrap();
            assert!(((a - b) / b).abs() < 1e-12);
        }
    }

    #[test]
    fn parallel_velocity_has_no_cross_term() {
        let l = Vector3::new(0.0, 0.0, 2.0);
        let ld = Vector3::new(0.0, 0.0, 0.7);
        assert_eq!(h_lower_bound(&l, &ld).unwrap(), 0.0);
        let h = h_function(&l, &ld).unwrap();
        let mp = Rat1Metric.at(2.0).unwrap();
        assert!(((h - mp.radial * 0.49) / h).abs() < 1e-12);
    }

    #[test]
    fn zero_radius_rejected() {
        assert!(f123(0.0).is_err());
    }
}
