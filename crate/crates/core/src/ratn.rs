//! The equivariant n-lump cylinder W(z) = c zⁿ, c = χ e^{iψ}.
//!
//! The χ-integrals are evaluated in log space so that s^{2n} never
//! overflows. With r = χ²sⁿ/(1 + χ²sⁿ) the χ-derivatives of the F_j are
//! χF_j′ = −4H_j and χ²F_j″ = 24K_j − 4H_j, where H_j and K_j are the
//! F_j integrals weighted by r and r². All three are positive integrals.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::numerics::{
    extrapolate_to_zero, finite_diff, quad_adaptive, quad_multiscale, quad_multiscale_vec, NumericsError, OdeSpec,
    QuadratureSpec, Termination,
};
use crate::rmg_core::{self, MagneticCoefficient, RadialKahlerSurface, ReducedState, RmgError, SurfaceCoeffs};

/// Largest degree accepted by [`RatnEqGeometry::new`].
pub const MAX_DEGREE: u32 = 12;

/// Overall constant in front of the F_j integrals.
pub const F_J_PREFACTOR: f64 = 16.0;

/// Numerical edges of the χ half-line used by [`RatnEqGeometry::as_surface`].
pub const CHI_DOMAIN: (f64, f64) = (1e-10, 1e10);

pub const PROFILE_HEADER: &str = "chi,F_n,a_restricted,a_intrinsic,V_ext_P,V_int_P";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RatnError {
    #[error("degree n = {0} must be at least 2")]
    DegreeTooSmall(u32),
    #[error("degree n = {0} exceeds the supported maximum {MAX_DEGREE}")]
    DegreeTooLarge(u32),
    #[error("{name} = {value} must be positive")]
    Nonpositive { name: &'static str, value: f64 },
    #[error("index j = {j} outside [0, {max}]")]
    IndexOutOfRange { j: usize, max: usize },
    #[error("limits are only tabulated for n = 2 (got {0})")]
    LimitsNeedDegreeTwo(u32),
    #[error("extrapolation failed for {0}")]
    Extrapolation(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Rmg(#[from] RmgError),
}

fn positive(name: &'static str, value: f64) -> Result<f64, RatnError> {
    if value > 0.0 {
        Ok(value)
    } else {
        Err(RatnError::Nonpositive { name, value })
    }
}

/// Which connection drives the flow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PotentialMode {
    /// Ambient Ricci form restricted to the cylinder: a = Σ_j G_j.
    #[default]
    Extrinsic,
    /// Ricci form of the induced metric: a = G_n.
    Intrinsic,
}

impl std::str::FromStr for PotentialMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "extrinsic" | "restricted" => Ok(PotentialMode::Extrinsic),
            "intrinsic" => Ok(PotentialMode::Intrinsic),
            other => Err(format!("unknown mode '{other}' (expected extrinsic or intrinsic)")),
        }
    }
}

/// F_j, H_j, K_j at one χ for a set of indices j.
#[derive(Clone, Debug, PartialEq)]
pub struct Moments {
    pub chi: f64,
    pub js: Vec<usize>,
    pub f: Vec<f64>,
    pub h: Vec<f64>,
    pub k: Vec<f64>,
}

impl Moments {
    fn slot(&self, j: usize) -> usize {
        self.js.iter().position(|&x| x == j).expect("index not computed")
    }

    pub fn f(&self, j: usize) -> f64 {
        self.f[self.slot(j)]
    }

    pub fn f_prime(&self, j: usize) -> f64 {
        -4.0 * self.h[self.slot(j)] / self.chi
    }

    pub fn f_second(&self, j: usize) -> f64 {
        let i = self.slot(j);
        (24.0 * self.k[i] - 4.0 * self.h[i]) / (self.chi * self.chi)
    }

    /// G_j = −χF_j′/(2F_j) = 2H_j/F_j.
    pub fn g(&self, j: usize) -> f64 {
        let i = self.slot(j);
        2.0 * self.h[i] / self.f[i]
    }

    /// dG_j/dχ.
    pub fn g_prime(&self, j: usize) -> f64 {
        let i = self.slot(j);
        let (f, h, k) = (self.f[i], self.h[i], self.k[i]);
        ((4.0 * h - 12.0 * k) / f + 8.0 * h * h / (f * f)) / self.chi
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConnectionPotentials {
    pub chi: f64,
    pub a_restricted: f64,
    pub a_intrinsic: f64,
    pub g: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegularityCheck {
    pub rho: f64,
    pub const1: f64,
    pub const2: f64,
}

/// One limit quantity: samples, extrapolated estimate and target.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitEstimate {
    pub name: String,
    pub estimate: f64,
    pub target: f64,
    /// Relative error, or absolute error when the target is 0.
    pub error: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// True for checks run alongside a literal one at a different momentum.
    pub companion: bool,
    pub samples: Vec<(f64, f64)>,
}

impl LimitEstimate {
    fn new(name: &str, estimate: f64, target: f64, tolerance: f64, companion: bool, samples: Vec<(f64, f64)>) -> Self {
        let error = if target == 0.0 {
            estimate.abs()
        } else {
            ((estimate - target) / target).abs()
        };
        LimitEstimate {
            name: name.to_string(),
            estimate,
            target,
            error,
            tolerance,
            passed: error < tolerance,
            companion,
            samples,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitsReport {
    pub n: u32,
    pub limits: Vec<LimitEstimate>,
}

impl LimitsReport {
    pub fn get(&self, name: &str) -> Option<&LimitEstimate> {
        self.limits.iter().find(|l| l.name == name)
    }
}

/// Outcome of an inward launch on the reduced cylinder.
#[derive(Clone, Debug, Serialize)]
pub struct InwardRun {
    pub mode: PotentialMode,
    pub momentum: f64,
    pub chi0: f64,
    pub chi_min: f64,
    pub t_end: f64,
    pub termination: Termination,
    /// The run stopped at the lower edge of the χ domain.
    pub reached_boundary: bool,
    pub momentum_drift: f64,
    pub speed_drift: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatnEqGeometry {
    pub n: u32,
    pub quad: QuadratureSpec,
}

impl RatnEqGeometry {
    pub fn new(n: u32) -> Result<Self, RatnError> {
        Self::with_quad(n, QuadratureSpec::default())
    }

    pub fn with_quad(n: u32, quad: QuadratureSpec) -> Result<Self, RatnError> {
        if n < 2 {
            return Err(RatnError::DegreeTooSmall(n));
        }
        if n > MAX_DEGREE {
            return Err(RatnError::DegreeTooLarge(n));
        }
        Ok(RatnEqGeometry { n, quad })
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    fn weight(&self, s: f64) -> f64 {
        // sⁿ/(1+sⁿ)², symmetric under s ↦ 1/s up to s⁻²
        let sn = if s > 1.0 { s.powi(-(self.n as i32)) } else { s.powi(self.n as i32) };
        sn / ((1.0 + sn) * (1.0 + sn))
    }

    fn rho_scales(rho: f64) -> Vec<f64> {
        let r2 = rho * rho;
        if r2 == 0.0 || (r2 - 1.0).abs() < 1e-12 {
            vec![1.0]
        } else {
            vec![r2.min(1.0), r2.max(1.0)]
        }
    }

    /// F(ρ) = πn²∫₀^∞ sⁿ/(1+sⁿ)² ds/(ρ²+s)².
    pub fn f_metric(&self, rho: f64) -> Result<f64, RatnError> {
        if !(rho >= 0.0) {
            return Err(RatnError::Nonpositive { name: "rho", value: rho });
        }
        let r2 = rho * rho;
        let n2 = self.nf() * self.nf();
        let v = quad_multiscale(
            |s| {
                let d = r2 + s;
                self.weight(s) / (d * d)
            },
            &Self::rho_scales(rho),
            &self.quad,
        )?;
        Ok(PI * n2 * v)
    }

    /// η_{n,k}(ρ) = ∫₀^∞ sⁿ/(1+sⁿ)² ds/(ρ²+s)^k.
    pub fn eta(&self, k: u32, rho: f64) -> Result<f64, RatnError> {
        if !(rho >= 0.0) {
            return Err(RatnError::Nonpositive { name: "rho", value: rho });
        }
        let r2 = rho * rho;
        Ok(quad_multiscale(
            |s| self.weight(s) / (r2 + s).powi(k as i32),
            &Self::rho_scales(rho),
            &self.quad,
        )?)
    }

    /// (F, F′, F″, F‴) at ρ by differentiating under the integral.
    pub fn f_metric_derivatives(&self, rho: f64) -> Result<[f64; 4], RatnError> {
        positive("rho", rho)?;
        let r2 = rho * rho;
        let c = PI * self.nf() * self.nf();
        let v = quad_multiscale_vec(
            |s, out| {
                let w = self.weight(s);
                let id = 1.0 / (r2 + s);
                let (i2, i3) = (id * id, id * id * id);
                let (i4, i5) = (i2 * i2, i2 * i3);
                out[0] = w * i2;
                out[1] = w * (-4.0 * rho * i3);
                out[2] = w * (-4.0 * i3 + 24.0 * r2 * i4);
                out[3] = w * (72.0 * rho * i4 - 192.0 * r2 * rho * i5);
            },
            4,
            &Self::rho_scales(rho),
            &self.quad,
        )?;
        Ok([c * v[0], c * v[1], c * v[2], c * v[3]])
    }

    /// Ratios of the two regularity combinations to πn²ρη_{n,4} and
    /// πn²ρ³η_{n,5}, with F′, F″, F‴ taken by finite differences of F.
    pub fn regularity_check(&self, rho: f64) -> Result<RegularityCheck, RatnError> {
        positive("rho", rho)?;
        let h = 0.1 * rho.min(1.0);
        let f = |r: f64| self.f_metric(r).unwrap_or(f64::NAN);
        let d1 = finite_diff(f, rho, 1, h);
        let d2 = finite_diff(f, rho, 2, h);
        let d3 = finite_diff(f, rho, 3, h);
        let c = PI * self.nf() * self.nf();
        let e1 = (d2 - d1 / rho) / rho;
        let e2 = d3 - 3.0 * e1;
        if [d1, d2, d3].iter().any(|v| !v.is_finite()) {
            // surface the quadrature failure
            self.f_metric(rho)?;
        }
        Ok(RegularityCheck {
            rho,
            const1: e1 / (c * rho * self.eta(4, rho)?),
            const2: e2 / (c * rho.powi(3) * self.eta(5, rho)?),
        })
    }

    /// (1/ρ)(F″ − F′/ρ) and F‴ − (3/ρ)(F″ − F′/ρ), both of which must
    /// vanish at ρ = 0 for the metric to be C³ there.
    pub fn regularity_expressions(&self, rho: f64) -> Result<(f64, f64), RatnError> {
        let [_, d1, d2, d3] = self.f_metric_derivatives(rho)?;
        let e1 = (d2 - d1 / rho) / rho;
        Ok((e1, d3 - 3.0 * e1))
    }

    fn check_index(&self, j: usize) -> Result<(), RatnError> {
        let max = 2 * self.n as usize;
        if j > max {
            return Err(RatnError::IndexOutOfRange { j, max });
        }
        Ok(())
    }

    fn chi_scales(&self, chi: f64) -> Vec<f64> {
        let c = chi.powf(-2.0 / self.nf());
        if (c - 1.0).abs() < 1e-12 {
            vec![1.0]
        } else {
            vec![c.min(1.0), c.max(1.0)]
        }
    }

    /// F_j, H_j, K_j for the given indices, on shared quadrature nodes.
    pub fn moments(&self, chi: f64, js: &[usize]) -> Result<Moments, RatnError> {
        positive("chi", chi)?;
        for &j in js {
            self.check_index(j)?;
        }
        let m = js.len();
        let nf = self.nf();
        let l2 = 2.0 * chi.ln();
        let v = quad_multiscale_vec(
            |s, out| {
                let ls = s.ln();
                // ln(1 + χ²sⁿ) and r = χ²sⁿ/(1 + χ²sⁿ) without overflow
                let l = l2 + nf * ls;
                let (lq, r) = if l > 0.0 {
                    (l + (-l).exp().ln_1p(), 1.0 / (1.0 + (-l).exp()))
                } else {
                    let e = l.exp();
                    (e.ln_1p(), e / (1.0 + e))
                };
                let base = -2.0 * lq - 2.0 * s.ln_1p();
                for (i, &j) in js.iter().enumerate() {
                    let fj = if s == 0.0 {
                        if j == 0 {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        (j as f64 * ls + base).exp()
                    };
                    let fj = F_J_PREFACTOR * fj;
                    out[i] = fj;
                    out[m + i] = fj * r;
                    out[2 * m + i] = fj * r * r;
                }
            },
            3 * m,
            &self.chi_scales(chi),
            &self.quad,
        )?;
        Ok(Moments {
            chi,
            js: js.to_vec(),
            f: v[..m].to_vec(),
            h: v[m..2 * m].to_vec(),
            k: v[2 * m..].to_vec(),
        })
    }

    fn all_indices(&self) -> Vec<usize> {
        (0..=2 * self.n as usize).collect()
    }

    /// F_j(χ) = 16∫₀^∞ s^j/(1+χ²sⁿ)² ds/(1+s)².
    pub fn f_j(&self, j: usize, chi: f64) -> Result<f64, RatnError> {
        Ok(self.moments(chi, &[j])?.f(j))
    }

    /// dF_j/dχ, differentiated under the integral.
    pub fn f_j_prime(&self, j: usize, chi: f64) -> Result<f64, RatnError> {
        Ok(self.moments(chi, &[j])?.f_prime(j))
    }

    pub fn connection_potentials(&self, chi: f64) -> Result<ConnectionPotentials, RatnError> {
        let m = self.moments(chi, &self.all_indices())?;
        let g: Vec<f64> = m.js.iter().map(|&j| m.g(j)).collect();
        Ok(ConnectionPotentials {
            chi,
            a_restricted: g.iter().sum(),
            a_intrinsic: g[self.n as usize],
            g,
        })
    }

    fn mode_indices(&self, mode: PotentialMode) -> Vec<usize> {
        match mode {
            PotentialMode::Extrinsic => self.all_indices(),
            PotentialMode::Intrinsic => vec![self.n as usize],
        }
    }

    /// a(χ) for the mode together with F_n.
    fn potential_and_fn(&self, chi: f64, mode: PotentialMode) -> Result<(f64, f64), RatnError> {
        let js = self.mode_indices(mode);
        let mut all = js.clone();
        if !all.contains(&(self.n as usize)) {
            all.push(self.n as usize);
        }
        let m = self.moments(chi, &all)?;
        Ok((js.iter().map(|&j| m.g(j)).sum(), m.f(self.n as usize)))
    }

    pub fn potential(&self, chi: f64, mode: PotentialMode) -> Result<f64, RatnError> {
        Ok(self.potential_and_fn(chi, mode)?.0)
    }

    /// V_P(χ) = (P + a(χ))²/(2χ²F_n(χ)).
    pub fn effective_potential(&self, p: f64, chi: f64, mode: PotentialMode) -> Result<f64, RatnError> {
        let (a, f_n) = self.potential_and_fn(chi, mode)?;
        Ok((p + a).powi(2) / (2.0 * chi * chi * f_n))
    }

    /// G₂ − ½ for n = 2, computed without the large cancellation.
    ///
    /// The part of s²/(1+s)² equal to 1 contributes exactly zero to
    /// 2H₂ − F₂/2, leaving an integral weighted by (2s+1)/(1+s)².
    pub fn g2_minus_half(&self, chi: f64) -> Result<f64, RatnError> {
        if self.n != 2 {
            return Err(RatnError::LimitsNeedDegreeTwo(self.n));
        }
        positive("chi", chi)?;
        let c2 = chi * chi;
        let d = quad_multiscale(
            |s| {
                let x = c2 * s * s;
                let q = 1.0 + x;
                let r = x / q;
                -(2.0 * s + 1.0) / ((1.0 + s) * (1.0 + s)) * (2.0 * r - 0.5) / (q * q)
            },
            &self.chi_scales(chi),
            &self.quad,
        )?;
        Ok(F_J_PREFACTOR * d / self.f_j(2, chi)?)
    }

    /// Reduced surface A₁ = F_n, A₃ = χ²F_n and magnetic coefficient a′ for the mode.
    pub fn as_surface(&self, mode: PotentialMode) -> (RadialKahlerSurface, MagneticCoefficient) {
        let geom = *self;
        let nn = self.n as usize;
        let surface = RadialKahlerSurface::new(format!("ratn_eq_n{}", self.n), CHI_DOMAIN, move |chi| {
            match geom.moments(chi, &[nn]) {
                Ok(m) => {
                    let (f, fp) = (m.f(nn), m.f_prime(nn));
                    SurfaceCoeffs {
                        a1: f,
                        a1p: fp,
                        a3: chi * chi * f,
                        a3p: 2.0 * chi * f + chi * chi * fp,
                    }
                }
                Err(e) => {
                    log::warn!("metric quadrature failed at chi = {chi}: {e}");
                    SurfaceCoeffs {
                        a1: f64::NAN,
                        a1p: f64::NAN,
                        a3: f64::NAN,
                        a3p: f64::NAN,
                    }
                }
            }
        });
        let js = self.mode_indices(mode);
        let js2 = js.clone();
        let name = match mode {
            PotentialMode::Extrinsic => "ratn_extrinsic",
            PotentialMode::Intrinsic => "ratn_intrinsic",
        };
        let field = MagneticCoefficient::new(
            name,
            move |chi| match geom.moments(chi, &js) {
                Ok(m) => js.iter().map(|&j| m.g_prime(j)).sum(),
                Err(_) => f64::NAN,
            },
            1.0,
        )
        .with_potential(move |chi| match geom.moments(chi, &js2) {
            Ok(m) => js2.iter().map(|&j| m.g(j)).sum(),
            Err(_) => f64::NAN,
        });
        (surface, field)
    }

    /// Reduced flow from χ₀ with ψ̇ fixed by the momentum P = χ²F_nψ̇ − a.
    /// Without `chi_dot0` the launch is inward with radial kinetic energy ½.
    #[allow(clippy::too_many_arguments)]
    pub fn launch(
        &self,
        mode: PotentialMode,
        p: f64,
        chi0: f64,
        chi_dot0: Option<f64>,
        t_max: f64,
        spec: &OdeSpec,
        n_samples: usize,
    ) -> Result<(rmg_core::Trajectory, InwardRun), RatnError> {
        positive("chi0", chi0)?;
        let (a0, f0) = self.potential_and_fn(chi0, mode)?;
        let chi_dot0 = chi_dot0.unwrap_or(-1.0 / f0.sqrt());
        let st = ReducedState::new(chi0, 0.0, chi_dot0, (p + a0) / (chi0 * chi0 * f0));
        let (surface, field) = self.as_surface(mode);
        let traj = rmg_core::evolve(&surface, &field, st, (0.0, t_max), spec, n_samples)?;
        let momentum_drift = traj
            .samples
            .iter()
            .filter_map(|s| rmg_core::angular_momentum(&surface, &field, &s.state))
            .map(|m| (m - p).abs())
            .fold(0.0, f64::max);
        let chi_min = traj.min_s().min(traj.last_state.s);
        let reached_boundary = !traj.termination.is_completed() && traj.last_state.s < 1e3 * CHI_DOMAIN.0;
        let summary = InwardRun {
            mode,
            momentum: p,
            chi0,
            chi_min,
            t_end: traj.last_t,
            termination: traj.termination,
            reached_boundary,
            momentum_drift,
            speed_drift: traj.speed_drift(),
        };
        Ok((traj, summary))
    }

    /// Inward launch from χ₀ with radial kinetic energy ½.
    pub fn inward_run(
        &self,
        mode: PotentialMode,
        p: f64,
        chi0: f64,
        t_max: f64,
        spec: &OdeSpec,
        n_samples: usize,
    ) -> Result<InwardRun, RatnError> {
        Ok(self.launch(mode, p, chi0, None, t_max, spec, n_samples)?.1)
    }

    /// ∫₀^∞ √F_n dχ, folded onto (0, 1] by F_n(1/χ) = χ⁴F_n(χ).
    pub fn total_length(&self) -> Result<f64, RatnError> {
        Ok(2.0 * self.length_unit_interval()?)
    }

    /// ∫₀¹ √F_n dχ, in the variable χ = v² to tame the χ^{-1/2} endpoint.
    fn length_unit_interval(&self) -> Result<f64, RatnError> {
        let nn = self.n as usize;
        let f = |v: f64| {
            if v == 0.0 {
                return 0.0;
            }
            self.f_j(nn, v * v).map(|x| 2.0 * v * x.sqrt()).unwrap_or(f64::NAN)
        };
        let spec = QuadratureSpec { rel_tol: 1e-10, ..self.quad };
        Ok(quad_adaptive(f, 0.0, 1.0, &spec)?)
    }

    /// ∫₀^∞ √F_n dχ with no use of the symmetry, for cross-checking.
    pub fn total_length_direct(&self) -> Result<f64, RatnError> {
        let nn = self.n as usize;
        let spec = QuadratureSpec { rel_tol: 1e-10, ..self.quad };
        let head = self.length_unit_interval()?;
        // χ = 1/v² on [1, ∞)
        let tail = quad_adaptive(
            |v: f64| {
                if v == 0.0 {
                    return 0.0;
                }
                let chi = 1.0 / (v * v);
                self.f_j(nn, chi).map(|x| x.sqrt() * 2.0 / (v * v * v)).unwrap_or(f64::NAN)
            },
            0.0,
            1.0,
            &spec,
        )?;
        Ok(head + tail)
    }

    /// One profile row in the order of [`PROFILE_HEADER`].
    pub fn profile_row(&self, chi: f64, p: f64) -> Result<[f64; 6], RatnError> {
        let m = self.moments(chi, &self.all_indices())?;
        let nn = self.n as usize;
        let a_r: f64 = m.js.iter().map(|&j| m.g(j)).sum();
        let a_i = m.g(nn);
        let f_n = m.f(nn);
        let denom = 2.0 * chi * chi * f_n;
        Ok([chi, f_n, a_r, a_i, (p + a_r).powi(2) / denom, (p + a_i).powi(2) / denom])
    }

    /// The χ → 0 limits for n = 2, with each estimate extrapolated in
    /// x = 1/log χ (or in χ log χ, χ for χF₂).
    pub fn limits_report(&self) -> Result<LimitsReport, RatnError> {
        if self.n != 2 {
            return Err(RatnError::LimitsNeedDegreeTwo(self.n));
        }
        let geom = RatnEqGeometry { quad: QuadratureSpec { rel_tol: 1e-13, ..self.quad }, ..*self };
        let mut limits = Vec::new();

        // χF₂ → 4π: χF₂ = L + b χ log χ + c χ + …
        let chis = [1e-2, 1e-3, 1e-4];
        let mut samples = Vec::new();
        for &c in &chis {
            samples.push((c, c * geom.f_j(2, c)?));
        }
        let est = fit_constant(&samples, |c| vec![c * c.ln(), c])
            .ok_or_else(|| RatnError::Extrapolation("chi F_2".into()))?;
        limits.push(LimitEstimate::new("chi_F2", est, 4.0 * PI, 1e-2, false, samples));

        let chis: Vec<f64> = (2..=8).map(|k| 10f64.powi(-5 * k)).collect();
        let mut rows = Vec::new();
        for &c in &chis {
            let cp = geom.connection_potentials(c)?;
            let f2 = geom.f_j(2, c)?;
            let d2 = geom.g2_minus_half(c)?;
            rows.push((c, cp.a_restricted, f2, d2));
        }
        let lin = |f: &dyn Fn(&(f64, f64, f64, f64)) -> f64| -> Vec<(f64, f64)> {
            rows.iter().map(|r| (r.0, f(r))).collect()
        };
        let by_log = |name: &str, s: &[(f64, f64)]| -> Result<f64, RatnError> {
            let xs: Vec<f64> = s.iter().map(|(c, _)| 1.0 / c.ln()).collect();
            let ys: Vec<f64> = s.iter().map(|(_, v)| *v).collect();
            extrapolate_to_zero(&xs, &ys, 3).ok_or_else(|| RatnError::Extrapolation(name.into()))
        };

        let s = lin(&|r| r.3 / (r.0 * r.0.ln()));
        limits.push(LimitEstimate::new("g2_slope", by_log("g2_slope", &s)?, -4.0 / PI, 1e-2, false, s));

        let s = lin(&|r| (r.1 - 3.0) * r.0.ln());
        limits.push(LimitEstimate::new("g_log", by_log("g_log", &s)?, -0.5, 1e-2, false, s));

        let s = lin(&|r| r.1 * r.1 / (2.0 * r.0 * r.2));
        limits.push(LimitEstimate::new("chi_V_ext_P0", by_log("chi_V_ext_P0", &s)?, 9.0 / (8.0 * PI), 1e-2, false, s));

        let s = lin(&|r| r.0.ln().powi(2) * (r.1 - 3.0).powi(2) / (2.0 * r.0 * r.2));
        limits.push(LimitEstimate::new(
            "chi_log2_V_ext_Pm3",
            by_log("chi_log2_V_ext_Pm3", &s)?,
            1.0 / (32.0 * PI),
            1e-2,
            false,
            s,
        ));

        // V^int at P = +½ and the companion P = −½; the estimate is the value at the smallest χ
        let s = lin(&|r| (1.0 + r.3).powi(2) / (2.0 * r.0 * r.0 * r.2));
        let last = s.last().map(|x| x.1).unwrap_or(f64::NAN);
        limits.push(LimitEstimate::new("V_int_P_half", last, 0.0, 1e-6, false, s));
        let s = lin(&|r| r.3 * r.3 / (2.0 * r.0 * r.0 * r.2));
        let last = s.last().map(|x| x.1).unwrap_or(f64::NAN);
        limits.push(LimitEstimate::new("V_int_P_minus_half", last, 0.0, 1e-6, true, s));

        Ok(LimitsReport { n: self.n, limits })
    }
}

/// Least squares y ≈ L + Σ b_i φ_i(x); returns L.
fn fit_constant(samples: &[(f64, f64)], basis: impl Fn(f64) -> Vec<f64>) -> Option<f64> {
    use nalgebra::{DMatrix, DVector};
    let k = basis(samples.first()?.0).len() + 1;
    if samples.len() < k {
        return None;
    }
    let a = DMatrix::from_fn(samples.len(), k, |i, j| if j == 0 { 1.0 } else { basis(samples[i].0)[j - 1] });
    let b = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.1));
    let sol = a.svd(true, true).solve(&b, 1e-15).ok()?;
    Some(sol[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g2() -> RatnEqGeometry {
        RatnEqGeometry::new(2).unwrap()
    }

    #[test]
    fn degree_bounds() {
        assert!(matches!(RatnEqGeometry::new(1), Err(RatnError::DegreeTooSmall(1))));
        assert!(matches!(RatnEqGeometry::new(13), Err(RatnError::DegreeTooLarge(13))));
        assert!(RatnEqGeometry::new(12).is_ok());
    }

    #[test]
    fn metric_at_origin() {
        let f0 = g2().f_metric(0.0).unwrap();
        assert!((f0 - PI * PI).abs() < 1e-10, "{f0}");
        let e = g2().eta(2, 1e-6).unwrap();
        assert!((e - PI / 4.0).abs() < 1e-6);
    }

    #[test]
    fn metric_is_eta_two() {
        for n in [2, 3, 7] {
            let g = RatnEqGeometry::new(n).unwrap();
            for rho in [0.1, 0.8, 3.0] {
                let f = g.f_metric(rho).unwrap();
                let e = PI * (n * n) as f64 * g.eta(2, rho).unwrap();
                assert!(((f - e) / f).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn metric_inversion_symmetry() {
        for n in [2, 3] {
            let g = RatnEqGeometry::new(n).unwrap();
            for rho in [0.5, 2.0, 5.0] {
                let a = g.f_metric(1.0 / rho).unwrap();
                let b = rho.powi(4) * g.f_metric(rho).unwrap();
                assert!(((a - b) / b).abs() < 1e-8, "n={n} ρ={rho}");
            }
        }
    }

    #[test]
    fn metric_derivative_under_integral() {
        let g = RatnEqGeometry::new(3).unwrap();
        for rho in [0.3, 1.7] {
            let d = g.f_metric_derivatives(rho).unwrap();
            let fd = finite_diff(|r| g.f_metric(r).unwrap(), rho, 1, 1e-3);
            assert!(((d[1] - fd) / fd).abs() < 1e-6);
        }
    }

    #[test]
    fn regularity_constants() {
        let g = RatnEqGeometry::new(5).unwrap();
        for rho in [0.2, 0.3, 0.5] {
            let r = g.regularity_check(rho).unwrap();
            assert!((r.const1 / 24.0 - 1.0).abs() < 5e-3, "{r:?}");
            assert!((r.const2 / -192.0 - 1.0).abs() < 5e-3, "{r:?}");
        }
    }

    #[test]
    fn regularity_expressions_vanish() {
        let g = RatnEqGeometry::new(5).unwrap();
        let (a1, b1) = g.regularity_expressions(1e-2).unwrap();
        let (a2, b2) = g.regularity_expressions(1e-3).unwrap();
        assert!(a2.abs() < a1.abs() && b2.abs() < b1.abs());
        // first expression is O(ρ), second O(ρ³)
        assert!((a1 / a2 - 10.0).abs() < 0.1, "{a1} {a2}");
        assert!((b1 / b2 - 1000.0).abs() < 10.0, "{b1} {b2}");
        let c = PI * 25.0;
        let e4 = 24.0 * c * 1e-2 * g.eta(4, 1e-2).unwrap();
        assert!(((a1 - e4) / e4).abs() < 1e-6);
    }

    #[test]
    fn f_j_against_refined_quadrature() {
        let g = g2();
        let v = g.f_j(0, 1.0).unwrap();
        // F₀(1) = 16∫ ds/((1+s²)²(1+s)²), refined independently
        let fine = QuadratureSpec::new(0.0, 1e-13, 20000).unwrap();
        let o = crate::numerics::quad_semi_infinite(|s| 16.0 / ((1.0 + s * s).powi(2) * (1.0 + s).powi(2)), &fine).unwrap();
        assert!(((v - o) / o).abs() < 1e-9);
    }

    #[test]
    fn f_n_inversion() {
        let g = g2();
        let a = g.f_j(2, 0.5).unwrap();
        let b = 16.0 * g.f_j(2, 2.0).unwrap();
        assert!(((a - b) / b).abs() < 1e-8);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let g = RatnEqGeometry::new(3).unwrap();
        let chi = 0.7;
        let m = g.moments(chi, &[0, 3, 6]).unwrap();
        for j in [0, 3, 6] {
            let fd = finite_diff(|c| g.f_j(j, c).unwrap(), chi, 1, 1e-3);
            assert!(((m.f_prime(j) - fd) / fd).abs() < 1e-7);
            let fd2 = finite_diff(|c| g.f_j(j, c).unwrap(), chi, 2, 1e-2);
            assert!(((m.f_second(j) - fd2) / fd2).abs() < 1e-5);
            let gd = finite_diff(|c| g.moments(c, &[j]).unwrap().g(j), chi, 1, 1e-3);
            assert!(((m.g_prime(j) - gd) / gd).abs() < 1e-6);
        }
    }

    #[test]
    fn g2_deficit_matches_direct() {
        let g = g2();
        for chi in [0.1, 1.0, 3.0] {
            let direct = g.connection_potentials(chi).unwrap().g[2] - 0.5;
            let stable = g.g2_minus_half(chi).unwrap();
            assert!((direct - stable).abs() < 1e-11, "{direct} {stable}");
        }
    }

    #[test]
    fn potential_inversion_is_affine() {
        let g = g2();
        let s1 = g.potential(0.5, PotentialMode::Extrinsic).unwrap() + g.potential(2.0, PotentialMode::Extrinsic).unwrap();
        let s2 = g.potential(0.3, PotentialMode::Extrinsic).unwrap()
            + g.potential(1.0 / 0.3, PotentialMode::Extrinsic).unwrap();
        assert!((s1 - s2).abs() < 1e-9, "{s1} {s2}");
    }

    #[test]
    fn length_is_finite_and_folds() {
        let g = g2();
        let folded = g.total_length().unwrap();
        let direct = g.total_length_direct().unwrap();
        assert!(folded > 0.0 && folded.is_finite());
        assert!(((folded - direct) / direct).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_arguments() {
        let g = g2();
        assert!(g.f_j(5, 1.0).is_err());
        assert!(g.f_j(1, 0.0).is_err());
        assert!(g.f_metric(-1.0).is_err());
        assert!(RatnEqGeometry::new(3).unwrap().limits_report().is_err());
    }
}
