//! Reduced RMG flow on rotationally symmetric Kähler surfaces
//! g = A₁(s) ds² + A₃(s) dψ², with magnetic two-form charge·F(s) ds∧dψ.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::numerics::{integrate, linspace, NumericsError, OdeSpec, OutOfDomain, Termination};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RmgError {
    #[error("s = {s} is outside the surface domain ({lo}, {hi})")]
    DomainExit { s: f64, lo: f64, hi: f64 },
    #[error("circular orbit at s = {s} is degenerate (A3' = 0)")]
    DegenerateOrbit { s: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceCoeffs {
    pub a1: f64,
    pub a1p: f64,
    pub a3: f64,
    pub a3p: f64,
}

type CoeffFn = dyn Fn(f64) -> SurfaceCoeffs + Send + Sync;
type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Clone)]
pub struct RadialKahlerSurface {
    name: String,
    domain: (f64, f64),
    eval: Arc<CoeffFn>,
}

impl fmt::Debug for RadialKahlerSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialKahlerSurface")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish()
    }
}

impl RadialKahlerSurface {
    pub fn new<F>(name: impl Into<String>, domain: (f64, f64), eval: F) -> Self
    where
        F: Fn(f64) -> SurfaceCoeffs + Send + Sync + 'static,
    {
        RadialKahlerSurface {
            name: name.into(),
            domain,
            eval: Arc::new(eval),
        }
    }

    /// Builds a surface from four separate closures.
    pub fn from_fns<A, B, C, D>(name: impl Into<String>, domain: (f64, f64), a1: A, a1p: B, a3: C, a3p: D) -> Self
    where
        A: Fn(f64) -> f64 + Send + Sync + 'static,
        B: Fn(f64) -> f64 + Send + Sync + 'static,
        C: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(name, domain, move |s| SurfaceCoeffs {
            a1: a1(s),
            a1p: a1p(s),
            a3: a3(s),
            a3p: a3p(s),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn contains(&self, s: f64) -> bool {
        s > self.domain.0 && s < self.domain.1
    }

    pub fn coeffs(&self, s: f64) -> Result<SurfaceCoeffs, RmgError> {
        if !self.contains(s) {
            return Err(RmgError::DomainExit {
                s,
                lo: self.domain.0,
                hi: self.domain.1,
            });
        }
        Ok((self.eval)(s))
    }

    pub fn a1(&self, s: f64) -> f64 {
        (self.eval)(s).a1
    }

    pub fn a3(&self, s: f64) -> f64 {
        (self.eval)(s).a3
    }

    pub fn speed(&self, st: &ReducedState) -> Result<f64, RmgError> {
        let c = self.coeffs(st.s)?;
        Ok((c.a1 * st.s_dot * st.s_dot + c.a3 * st.psi_dot * st.psi_dot).sqrt())
    }

    /// The Euclidean plane in polar coordinates.
    pub fn flat_disc() -> Self {
        Self::new("flat", (0.0, f64::INFINITY), |s| SurfaceCoeffs {
            a1: 1.0,
            a1p: 0.0,
            a3: s * s,
            a3p: 2.0 * s,
        })
    }
}

#[derive(Clone)]
pub struct MagneticCoefficient {
    name: String,
    f: Arc<ScalarFn>,
    potential: Option<Arc<ScalarFn>>,
    pub charge: f64,
}

impl fmt::Debug for MagneticCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MagneticCoefficient")
            .field("name", &self.name)
            .field("charge", &self.charge)
            .finish()
    }
}

impl MagneticCoefficient {
    pub fn new<F>(name: impl Into<String>, f: F, charge: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        MagneticCoefficient {
            name: name.into(),
            f: Arc::new(f),
            potential: None,
            charge,
        }
    }

    pub fn zero() -> Self {
        Self::new("geodesic", |_| 0.0, 0.0).with_potential(|_| 0.0)
    }

    /// Attaches a(s) with a' = F, used for the conserved angular momentum.
    pub fn with_potential<A>(mut self, a: A) -> Self
    where
        A: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.potential = Some(Arc::new(a));
        self
    }

    pub fn with_charge(mut self, charge: f64) -> Self {
        self.charge = charge;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// charge · F(s)
    pub fn value(&self, s: f64) -> f64 {
        if self.charge == 0.0 {
            0.0
        } else {
            self.charge * (self.f)(s)
        }
    }

    /// charge · a(s), when a potential is attached.
    pub fn potential(&self, s: f64) -> Option<f64> {
        self.potential.as_ref().map(|a| self.charge * a(s))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub s: f64,
    pub psi: f64,
    pub s_dot: f64,
    pub psi_dot: f64,
}

impl ReducedState {
    pub fn new(s: f64, psi: f64, s_dot: f64, psi_dot: f64) -> Self {
        ReducedState { s, psi, s_dot, psi_dot }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.s, self.psi, self.s_dot, self.psi_dot]
    }

    pub fn from_slice(y: &[f64]) -> Self {
        ReducedState::new(y[0], y[1], y[2], y[3])
    }
}

/// (ṡ, ψ̇, s̈, ψ̈) for the reduced system.
pub fn rmg_rhs(
    surface: &RadialKahlerSurface,
    field: &MagneticCoefficient,
    st: &ReducedState,
) -> Result<[f64; 4], RmgError> {
    let c = surface.coeffs(st.s)?;
    let f = field.value(st.s);
    let (sd, pd) = (st.s_dot, st.psi_dot);
    let sdd = -(c.a1p * sd * sd - c.a3p * pd * pd + 2.0 * f * pd) / (2.0 * c.a1);
    let pdd = -(c.a3p * sd * pd - f * sd) / c.a3;
    Ok([sd, pd, sdd, pdd])
}

/// ν(s) = 2·charge·F(s)/A₃'(s): angular velocity of the circular orbit at s.
pub fn orbit_frequency(surface: &RadialKahlerSurface, field: &MagneticCoefficient, s: f64) -> Result<f64, RmgError> {
    let c = surface.coeffs(s)?;
    if c.a3p == 0.0 {
        return Err(RmgError::DegenerateOrbit { s });
    }
    Ok(2.0 * field.value(s) / c.a3p)
}

/// A₃ψ̇ − charge·a(s), if the field carries a potential.
pub fn angular_momentum(surface: &RadialKahlerSurface, field: &MagneticCoefficient, st: &ReducedState) -> Option<f64> {
    let a = field.potential(st.s)?;
    Some(surface.a3(st.s) * st.psi_dot - a)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub state: ReducedState,
    pub speed: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryMeta {
    pub surface: String,
    pub field: String,
    pub charge: f64,
    pub spec: OdeSpec,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub meta: TrajectoryMeta,
    pub termination: Termination,
    /// Last accepted state, possibly past the last sample (useful on early stops).
    pub last_t: f64,
    pub last_state: ReducedState,
}

impl Trajectory {
    /// max |v(t) − v(0)| / v(0) over the samples.
    pub fn speed_drift(&self) -> f64 {
        let v0 = match self.samples.first() {
            Some(s) => s.speed,
            None => return 0.0,
        };
        self.samples
            .iter()
            .map(|s| (s.speed - v0).abs() / v0)
            .fold(0.0, f64::max)
    }

    pub fn min_s(&self) -> f64 {
        self.samples.iter().map(|s| s.state.s).fold(f64::INFINITY, f64::min)
    }

    pub fn max_s(&self) -> f64 {
        self.samples.iter().map(|s| s.state.s).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Integrates the reduced system, recording `n_samples` equally spaced states.
pub fn evolve(
    surface: &RadialKahlerSurface,
    field: &MagneticCoefficient,
    state0: ReducedState,
    t_span: (f64, f64),
    spec: &OdeSpec,
    n_samples: usize,
) -> Result<Trajectory, RmgError> {
    surface.coeffs(state0.s)?;
    let times = linspace(t_span.0, t_span.1, n_samples.max(2));
    let rhs = |_t: f64, y: &[f64], d: &mut [f64]| -> Result<(), OutOfDomain> {
        let r = rmg_rhs(surface, field, &ReducedState::from_slice(y)).map_err(|_| OutOfDomain)?;
        d.copy_from_slice(&r);
        Ok(())
    };
    let run = integrate(rhs, &state0.to_array(), t_span, spec, &times)?;
    let mut samples = Vec::with_capacity(run.samples.len());
    for (t, y) in &run.samples {
        let st = ReducedState::from_slice(y);
        let speed = surface.speed(&st).unwrap_or(f64::NAN);
        samples.push(Sample { t: *t, state: st, speed });
    }
    if !run.termination.is_completed() {
        log::info!(
            "reduced flow on {} stopped early: {:?}",
            surface.name(),
            run.termination
        );
    }
    Ok(Trajectory {
        samples,
        meta: TrajectoryMeta {
            surface: surface.name().to_string(),
            field: field.name().to_string(),
            charge: field.charge,
            spec: *spec,
        },
        termination: run.termination,
        last_t: run.last.0,
        last_state: ReducedState::from_slice(&run.last.1),
    })
}

/// Gauss curvature of the conformal metric sech|z| |dz|².
pub fn sech_curvature(r: f64) -> f64 {
    let sech = 1.0 / r.cosh();
    let tanh_over_r = if r.abs() < 1e-4 { 1.0 - r * r / 3.0 } else { r.tanh() / r };
    (tanh_over_r + sech * sech) / (2.0 * sech)
}

/// The plane with metric sech r (dr² + r² dψ²) and its Ricci magnetic field.
pub fn sech_surface(charge: f64) -> (RadialKahlerSurface, MagneticCoefficient) {
    let surface = RadialKahlerSurface::new("sech", (0.0, f64::INFINITY), |r| {
        let sech = 1.0 / r.cosh();
        let tanh = r.tanh();
        SurfaceCoeffs {
            a1: sech,
            a1p: -sech * tanh,
            a3: r * r * sech,
            a3p: 2.0 * r * sech - r * r * sech * tanh,
        }
    });
    // F = K·sqrt(A1 A3) = (tanh r + r sech² r)/2, with potential r tanh r / 2.
    let field = MagneticCoefficient::new(
        "sech_ricci",
        |r: f64| {
            let sech = 1.0 / r.cosh();
            0.5 * (r.tanh() + r * sech * sech)
        },
        charge,
    )
    .with_potential(|r: f64| 0.5 * r * r.tanh());
    (surface, field)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geodesic_reduction() {
        let surf = RadialKahlerSurface::from_fns(
            "test",
            (0.0, 10.0),
            |s| 1.0 + s * s,
            |s| 2.0 * s,
            |s| s,
            |_| 1.0,
        );
        let st = ReducedState::new(1.5, 0.0, 0.7, 0.0);
        let r = rmg_rhs(&surf, &MagneticCoefficient::zero(), &st).unwrap();
        let expect = -(2.0 * 1.5) * 0.49 / (2.0 * (1.0 + 2.25));
        assert!((r[2] - expect).abs() < 1e-15);
    }

    #[test]
    fn flat_centripetal() {
        let st = ReducedState::new(1.0, 0.0, 0.0, 1.0);
        let r = rmg_rhs(&RadialKahlerSurface::flat_disc(), &MagneticCoefficient::zero(), &st).unwrap();
        assert_eq!(r[2], 1.0);
        assert_eq!(r[3], 0.0);
    }

    #[test]
    fn domain_exit_error() {
        let st = ReducedState::new(-1.0, 0.0, 0.0, 1.0);
        assert!(matches!(
            rmg_rhs(&RadialKahlerSurface::flat_disc(), &MagneticCoefficient::zero(), &st),
            Err(RmgError::DomainExit { .. })
        ));
    }

    #[test]
    fn zero_field_frequency() {
        let f = orbit_frequency(&RadialKahlerSurface::flat_disc(), &MagneticCoefficient::zero(), 2.0).unwrap();
        assert_eq!(f, 0.0);
    }

    #[test]
    fn flat_straight_lines() {
        // Start at (1, 0) moving with velocity (0.3, 1) in Cartesian terms.
        let st = ReducedState::new(1.0, 0.0, 0.3, 1.0);
        let traj = evolve(
            &RadialKahlerSurface::flat_disc(),
            &MagneticCoefficient::zero(),
            st,
            (0.0, 5.0),
            &OdeSpec::default(),
            11,
        )
        .unwrap();
        for smp in &traj.samples {
            let (x, y) = (smp.state.s * smp.state.psi.cos(), smp.state.s * smp.state.psi.sin());
            assert!((x - (1.0 + 0.3 * smp.t)).abs() < 1e-9);
            assert!((y - smp.t).abs() < 1e-9);
        }
    }

    #[test]
    fn sech_curvature_matches_series_limit() {
        assert!((sech_curvature(1e-6) - 1.0).abs() < 1e-10);
    }
}
