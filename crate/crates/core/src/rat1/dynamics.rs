//! Euler–Poincaré equations of the Rat₁ RMG Lagrangian
//!
//!   L = ½[A₁|λ̇|² + A₂(λ·λ̇)² + A₃|Ω|² + A₄(λ·Ω)² + A₅ λ·(Ω×λ̇) − ΛĀ(λ·Ω)]
//!
//! on SO(3) × ℝ³, with O⁻¹Ȯ = hat(Ω). With Π = ∂L/∂Ω and p = ∂L/∂λ̇,
//!
//!   Π̇ = Π × Ω,     ṗ = ∂L/∂λ,
//!
//! which are solved for (Ω̇, λ̈) through the 6×6 mass matrix.

use nalgebra::{Matrix3, Matrix6, SMatrix, SVector, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use super::metric::{Rat1Error, Rat1Metric, Rat1Point};
use crate::numerics::{finite_diff, integrate, linspace, OdeSpec, OutOfDomain, Termination};

pub fn hat(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LumpState {
    pub o: Matrix3<f64>,
    pub omega: Vector3<f64>,
    pub lambda: Vector3<f64>,
    pub lambda_dot: Vector3<f64>,
}

/// JSON form of a [`LumpState`]: `O` is row-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LumpStateDoc {
    #[serde(rename = "O")]
    pub o: [f64; 9],
    #[serde(rename = "Omega")]
    pub omega: [f64; 3],
    pub lambda: [f64; 3],
    pub lambda_dot: [f64; 3],
}

impl From<&LumpStateDoc> for LumpState {
    fn from(d: &LumpStateDoc) -> Self {
        LumpState {
            o: Matrix3::from_row_slice(&d.o),
            omega: Vector3::from_column_slice(&d.omega),
            lambda: Vector3::from_column_slice(&d.lambda),
            lambda_dot: Vector3::from_column_slice(&d.lambda_dot),
        }
    }
}

impl From<&LumpState> for LumpStateDoc {
    fn from(s: &LumpState) -> Self {
        let mut o = [0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                o[3 * i + j] = s.o[(i, j)];
            }
        }
        LumpStateDoc {
            o,
            omega: s.omega.into(),
            lambda: s.lambda.into(),
            lambda_dot: s.lambda_dot.into(),
        }
    }
}

impl LumpState {
    pub fn at_rest(lambda: Vector3<f64>) -> Self {
        LumpState {
            o: Matrix3::identity(),
            omega: Vector3::zeros(),
            lambda,
            lambda_dot: Vector3::zeros(),
        }
    }

    /// Flat layout: O row-major, Ω, λ, λ̇.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(18);
        for i in 0..3 {
            for j in 0..3 {
                y.push(self.o[(i, j)]);
            }
        }
        y.extend(self.omega.iter());
        y.extend(self.lambda.iter());
        y.extend(self.lambda_dot.iter());
        y
    }

    pub fn from_slice(y: &[f64]) -> Self {
        LumpState {
            o: Matrix3::from_row_slice(&y[0..9]),
            omega: Vector3::from_column_slice(&y[9..12]),
            lambda: Vector3::from_column_slice(&y[12..15]),
            lambda_dot: Vector3::from_column_slice(&y[15..18]),
        }
    }

    /// ‖OᵀO − I‖ (Frobenius).
    pub fn orthogonality_defect(&self) -> f64 {
        (self.o.transpose() * self.o - Matrix3::identity()).norm()
    }

    /// Replaces O by the orthogonal factor of its polar decomposition.
    pub fn reorthonormalize(&mut self) {
        let svd = self.o.svd(true, true);
        if let (Some(u), Some(vt)) = (svd.u, svd.v_t) {
            self.o = u * vt;
        }
    }

    /// The group action (L, R)·(O, Ω, λ, λ̇) = (L O Rᵀ, RΩ, Rλ, Rλ̇).
    pub fn transformed(&self, left: &Matrix3<f64>, right: &Matrix3<f64>) -> Self {
        LumpState {
            o: left * self.o * right.transpose(),
            omega: right * self.omega,
            lambda: right * self.lambda,
            lambda_dot: right * self.lambda_dot,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Charges {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "P")]
    pub p: [f64; 3],
    #[serde(rename = "Q")]
    pub q: [f64; 3],
}

impl Charges {
    pub fn p_vec(&self) -> Vector3<f64> {
        Vector3::from(self.p)
    }

    pub fn q_vec(&self) -> Vector3<f64> {
        Vector3::from(self.q)
    }
}

fn point(m: &Rat1Metric, lambda: &Vector3<f64>) -> Rat1Point {
    m.at_u(lambda.norm_squared())
}

/// Π = ∂L/∂Ω.
pub fn body_momentum(mp: &Rat1Point, st: &LumpState) -> Vector3<f64> {
    let (om, l, ld) = (&st.omega, &st.lambda, &st.lambda_dot);
    mp.a3 * om + mp.a4 * l.dot(om) * l + 0.5 * mp.a5 * ld.cross(l) - 0.5 * mp.lam_abar * l
}

/// p = ∂L/∂λ̇.
pub fn shape_momentum(mp: &Rat1Point, st: &LumpState) -> Vector3<f64> {
    let (om, l, ld) = (&st.omega, &st.lambda, &st.lambda_dot);
    radial_block(mp, l) * ld + 0.5 * mp.a5 * l.cross(om)
}

/// A₁ I + A₂ λλᵀ written as A₁(I − λ̂λ̂ᵀ) + (4B/Λ²) λ̂λ̂ᵀ.
fn radial_block(mp: &Rat1Point, l: &Vector3<f64>) -> Matrix3<f64> {
    let id = Matrix3::identity();
    if mp.u == 0.0 {
        return mp.a1 * id;
    }
    let n = l / mp.lambda;
    let proj = n * n.transpose();
    mp.a1 * (id - proj) + mp.radial * proj
}

pub fn mass_matrix(mp: &Rat1Point, l: &Vector3<f64>) -> Matrix6<f64> {
    let mut m = Matrix6::zeros();
    let h = hat(l);
    m.fixed_view_mut::<3, 3>(0, 0)
        .copy_from(&(mp.a3 * Matrix3::identity() + mp.a4 * l * l.transpose()));
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-0.5 * mp.a5 * h));
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&(0.5 * mp.a5 * h));
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&radial_block(mp, l));
    m
}

/// (E, P, Q) with P = O Π and Q = Π − λ × p.
pub fn energy_and_momenta(st: &LumpState) -> Charges {
    let mp = point(&Rat1Metric, &st.lambda);
    let pi = body_momentum(&mp, st);
    let p = shape_momentum(&mp, st);
    let v = Vector6::new(
        st.omega.x,
        st.omega.y,
        st.omega.z,
        st.lambda_dot.x,
        st.lambda_dot.y,
        st.lambda_dot.z,
    );
    let e = 0.5 * v.dot(&(mass_matrix(&mp, &st.lambda) * v));
    let pp = st.o * pi;
    let q = pi - st.lambda.cross(&p);
    Charges {
        e,
        p: pp.into(),
        q: q.into(),
    }
}

/// Energy as the printed quadratic form, for cross-checking.
pub fn energy_direct(st: &LumpState) -> f64 {
    let mp = point(&Rat1Metric, &st.lambda);
    let (om, l, ld) = (&st.omega, &st.lambda, &st.lambda_dot);
    0.5 * (mp.a1 * ld.norm_squared()
        + mp.a2 * l.dot(ld).powi(2)
        + mp.a3 * om.norm_squared()
        + mp.a4 * l.dot(om).powi(2)
        + mp.a5 * l.dot(&om.cross(ld)))
}

/// (Ω̇, λ̈).
pub fn accelerations(st: &LumpState) -> Result<(Vector3<f64>, Vector3<f64>), Rat1Error> {
    let mp = point(&Rat1Metric, &st.lambda);
    let (om, l, ld) = (&st.omega, &st.lambda, &st.lambda_dot);
    let ll = l.dot(ld);
    let lo = l.dot(om);
    let pi = body_momentum(&mp, st);

    // (∂Π/∂λ) λ̇
    let dpi = 2.0
        * ll
        * (mp.a3_u * om + mp.a4_u * lo * l + 0.5 * mp.a5_u * ld.cross(l) - 0.5 * mp.lam_abar_u * l)
        + mp.a4 * (ld.dot(om) * l + lo * ld)
        - 0.5 * mp.lam_abar * ld;
    // (∂p/∂λ) λ̇
    let dp = 2.0 * ll * (mp.a1_u * ld + mp.a2_u * ll * l + 0.5 * mp.a5_u * l.cross(om))
        + mp.a2 * (ld.norm_squared() * l + ll * ld)
        + 0.5 * mp.a5 * ld.cross(om);
    // ∂L/∂λ
    let scal = mp.a1_u * ld.norm_squared()
        + mp.a2_u * ll * ll
        + mp.a3_u * om.norm_squared()
        + mp.a4_u * lo * lo
        + mp.a5_u * l.dot(&om.cross(ld))
        - mp.lam_abar_u * lo;
    let dl = scal * l + mp.a2 * ll * ld + mp.a4 * lo * om + 0.5 * mp.a5 * om.cross(ld) - 0.5 * mp.lam_abar * om;

    let r1 = pi.cross(om) - dpi;
    let r2 = dl - dp;
    let rhs = Vector6::new(r1.x, r1.y, r1.z, r2.x, r2.y, r2.z);
    let sol = mass_matrix(&mp, l)
        .lu()
        .solve(&rhs)
        .ok_or(Rat1Error::SingularMassMatrix(mp.lambda))?;
    Ok((sol.fixed_rows::<3>(0).into(), sol.fixed_rows::<3>(3).into()))
}

/// Flat-vector right-hand side (Ȯ, Ω̇, λ̇, λ̈).
pub fn eom(st: &LumpState) -> Result<Vec<f64>, Rat1Error> {
    let (om_dot, l_ddot) = accelerations(st)?;
    let o_dot = st.o * hat(&st.omega);
    let d = LumpState {
        o: o_dot,
        omega: om_dot,
        lambda: st.lambda_dot,
        lambda_dot: l_ddot,
    };
    Ok(d.to_vec())
}

/// The linear system J·(Ω̇, λ̈) = −k expressing dE/dt = 0, dP/dt = 0 and
/// dQ/dt = 0, with charge partials by finite differences. The P, Q rows alone
/// have rank 5; the energy row fixes the remaining direction.
pub fn noether_system(st: &LumpState) -> (SMatrix<f64, 7, 6>, SVector<f64, 7>) {
    // charges as a function of the flat state
    let charge_vec = |y: &[f64]| -> [f64; 7] {
        let c = energy_and_momenta(&LumpState::from_slice(y));
        [c.e, c.p[0], c.p[1], c.p[2], c.q[0], c.q[1], c.q[2]]
    };
    let y0 = st.to_vec();
    let o_dot = st.o * hat(&st.omega);
    let mut pos_rate = vec![0.0; 18];
    for i in 0..3 {
        for j in 0..3 {
            pos_rate[3 * i + j] = o_dot[(i, j)];
        }
    }
    for k in 0..3 {
        pos_rate[12 + k] = st.lambda_dot[k];
    }
    // d/dt through O and λ only. The charges are linear in O and at most
    // quadratic in (Ω, λ̇), so those central differences are exact at unit
    // step; only the λ direction carries truncation error.
    let (mut o_rate, mut l_rate) = (pos_rate.clone(), pos_rate);
    o_rate[12..15].fill(0.0);
    l_rate[..9].fill(0.0);
    let along = |rate: &[f64], h: f64, r: usize| {
        let y: Vec<f64> = y0.iter().zip(rate).map(|(a, b)| a + h * b).collect();
        charge_vec(&y)[r]
    };
    let h_lambda = 1e-3 * st.lambda.norm().max(1.0);
    let mut known = [0.0; 7];
    for (r, slot) in known.iter_mut().enumerate() {
        *slot = finite_diff(|h| along(&o_rate, h, r), 0.0, 1, 1.0)
            + finite_diff(|h| along(&l_rate, h, r), 0.0, 1, h_lambda);
    }
    // columns: partial derivatives w.r.t. Ω and λ̇
    let mut jac = SMatrix::<f64, 7, 6>::zeros();
    let idx = [9, 10, 11, 15, 16, 17];
    for (c, &k) in idx.iter().enumerate() {
        for r in 0..7 {
            jac[(r, c)] = finite_diff(
                |h| {
                    let mut y = y0.clone();
                    y[k] += h;
                    charge_vec(&y)[r]
                },
                0.0,
                1,
                1.0,
            );
        }
    }
    (jac, SVector::from(known))
}

/// Least-squares solve of [`noether_system`] for (Ω̇, λ̈). Independent of
/// [`accelerations`]. Its condition number grows like 1/B² with ‖λ‖, which
/// limits the attainable agreement to about 1e−7 near ‖λ‖ = 20.
pub fn noether_accelerations(st: &LumpState) -> Option<(Vector3<f64>, Vector3<f64>)> {
    let (jac, known) = noether_system(st);
    let qr = jac.qr();
    let sol = qr.r().solve_upper_triangular(&(qr.q().transpose() * -known))?;
    Some((sol.fixed_rows::<3>(0).into(), sol.fixed_rows::<3>(3).into()))
}

/// ‖J a + k‖ / (‖J‖‖a‖ + ‖k‖) for the accelerations a = (Ω̇, λ̈): how far they
/// are from conserving the charges, free of the system's conditioning.
pub fn noether_backward_error(st: &LumpState, omega_dot: &Vector3<f64>, lambda_ddot: &Vector3<f64>) -> f64 {
    let (jac, known) = noether_system(st);
    let a = SVector::<f64, 6>::new(omega_dot.x, omega_dot.y, omega_dot.z, lambda_ddot.x, lambda_ddot.y, lambda_ddot.z);
    (jac * a + known).norm() / (jac.norm() * a.norm() + known.norm())
}

#[derive(Clone, Debug, Serialize)]
pub struct LumpSample {
    pub t: f64,
    #[serde(skip)]
    pub state: LumpState,
    pub charges: Charges,
}

#[derive(Clone, Debug)]
pub struct LumpTrajectory {
    pub samples: Vec<LumpSample>,
    pub termination: Termination,
    pub spec: OdeSpec,
}

impl LumpTrajectory {
    /// Max over samples of (|ΔE|/|E₀|, ‖ΔP‖/‖P₀‖, ‖ΔQ‖/‖Q₀‖); a zero initial
    /// charge is compared in absolute terms.
    pub fn charge_drift(&self) -> (f64, f64, f64) {
        let c0 = self.samples[0].charges;
        let rel = |d: f64, n: f64| if n > 0.0 { d / n } else { d };
        let mut out = (0.0f64, 0.0f64, 0.0f64);
        for s in &self.samples {
            let c = s.charges;
            out.0 = out.0.max(rel((c.e - c0.e).abs(), c0.e.abs()));
            out.1 = out.1.max(rel((c.p_vec() - c0.p_vec()).norm(), c0.p_vec().norm()));
            out.2 = out.2.max(rel((c.q_vec() - c0.q_vec()).norm(), c0.q_vec().norm()));
        }
        out
    }

    pub fn max_lambda(&self) -> f64 {
        self.samples.iter().map(|s| s.state.lambda.norm()).fold(0.0, f64::max)
    }

    pub fn max_orthogonality_defect(&self) -> f64 {
        self.samples.iter().map(|s| s.state.orthogonality_defect()).fold(0.0, f64::max)
    }

    /// True when the run stopped at the boundary ‖λ‖ = [`ESCAPE_RADIUS`].
    pub fn escaped(&self) -> bool {
        matches!(self.termination, Termination::DomainExit { .. })
    }

    pub fn t_end(&self) -> f64 {
        self.samples.last().map(|s| s.t).unwrap_or(0.0)
    }
}

/// Computational boundary: runs stop with a domain exit once ‖λ‖ passes this
/// radius. Level sets with ‖Q‖ > 2 can be unbounded, and far out the spin
/// about λ̂ has inertia B → 0, so the step size falls steeply with ‖λ‖.
/// Crossing the boundary is not by itself proof of escape to infinity.
pub const ESCAPE_RADIUS: f64 = 50.0;

/// Integrates the flow with O re-orthonormalized at every output time. On an
/// early stop the last accepted state is appended as a final sample.
pub fn evolve(
    state0: &LumpState,
    t_span: (f64, f64),
    spec: &OdeSpec,
    n_samples: usize,
) -> Result<LumpTrajectory, Rat1Error> {
    let times = linspace(t_span.0, t_span.1, n_samples.max(2));
    let mut st = *state0;
    let mut samples = vec![LumpSample {
        t: times[0],
        state: st,
        charges: energy_and_momenta(&st),
    }];
    let rhs = |_t: f64, y: &[f64], d: &mut [f64]| -> Result<(), OutOfDomain> {
        let st = LumpState::from_slice(y);
        if !(st.lambda.norm() <= ESCAPE_RADIUS) {
            return Err(OutOfDomain);
        }
        let r = eom(&st).map_err(|_| OutOfDomain)?;
        d.copy_from_slice(&r);
        Ok(())
    };
    let mut termination = Termination::Completed;
    for w in times.windows(2) {
        let run = integrate(rhs, &st.to_vec(), (w[0], w[1]), spec, &[w[1]])?;
        if !run.termination.is_completed() {
            termination = run.termination;
            if run.last.0 > w[0] {
                let last = LumpState::from_slice(&run.last.1);
                samples.push(LumpSample {
                    t: run.last.0,
                    state: last,
                    charges: energy_and_momenta(&last),
                });
            }
            break;
        }
        st = LumpState::from_slice(&run.last.1);
        st.reorthonormalize();
        samples.push(LumpSample {
            t: w[1],
            state: st,
            charges: energy_and_momenta(&st),
        });
    }
    Ok(LumpTrajectory {
        samples,
        termination,
        spec: *spec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn generic() -> LumpState {
        let axis = Vector3::new(0.3, -0.5, 0.8).normalize();
        LumpState {
            o: nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), 0.9).into_inner(),
            omega: Vector3::new(0.4, -0.2, 0.7),
            lambda: Vector3::new(0.6, 1.1, -0.4),
            lambda_dot: Vector3::new(-0.3, 0.5, 0.2),
        }
    }

    #[test]
    fn rest_state_charges() {
        let l = Vector3::new(0.0, 0.0, 1.0);
        let st = LumpState::at_rest(l);
        let c = energy_and_momenta(&st);
        let mp = Rat1Metric.at(1.0).unwrap();
        assert_eq!(c.e, 0.0);
        let q = -0.5 * mp.lam_abar * l;
        assert!((c.q_vec() - q).norm() < 1e-15);
        assert!((c.p_vec() - q).norm() < 1e-15);
    }

    #[test]
    fn energy_two_ways() {
        let st = generic();
        let a = energy_and_momenta(&st).e;
        let b = energy_direct(&st);
        assert!(((a - b) / b).abs() < 1e-13);
    }

    #[test]
    fn charges_stationary_along_eom() {
        let st = generic();
        let d = eom(&st).unwrap();
        let y0 = st.to_vec();
        let along = |h: f64, k: usize| {
            let y: Vec<f64> = y0.iter().zip(&d).map(|(a, b)| a + h * b).collect();
            let c = energy_and_momenta(&LumpState::from_slice(&y));
            [c.e, c.p[0], c.p[1], c.p[2], c.q[0], c.q[1], c.q[2]][k]
        };
        for k in 0..7 {
            let rate = finite_diff(|h| along(h, k), 0.0, 1, 1e-3);
            assert!(rate.abs() < 1e-9, "component {k}: {rate}");
        }
    }

    #[test]
    fn noether_solve_agrees() {
        let st = generic();
        let (a, b) = accelerations(&st).unwrap();
        let (c, d) = noether_accelerations(&st).unwrap();
        assert!((a - c).norm() < 1e-8, "{a} {c}");
        assert!((b - d).norm() < 1e-8, "{b} {d}");
    }

    #[test]
    fn regular_at_origin() {
        let mut st = generic();
        st.lambda = Vector3::zeros();
        let d = eom(&st).unwrap();
        assert!(d.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn json_roundtrip() {
        let st = generic();
        let doc = LumpStateDoc::from(&st);
        let back = LumpState::from(&doc);
        assert_eq!(st, back);
    }
}
