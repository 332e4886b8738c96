//! Trajectory drivers behind the `hyp2`, `rat1 evolve` and `ratn evolve`
//! commands. Each returns the CSV table and a summary; early termination is
//! reported in both rather than as an error.

use serde::Serialize;

use crate::config::{ConfigError, Hyp2Config, Hyp2Flow, Rat1Config, RatnConfig};
use crate::hyperbolic::{disk_map, embed, FieldMode, HyperbolicError, Mod2Metric};
use crate::io::CsvTable;
use crate::numerics::{OdeSpec, Termination};
use crate::rat1::{self, LumpState, Rat1Error};
use crate::ratn::{InwardRun, RatnEqGeometry, RatnError};
use crate::rmg_core::{self, MagneticCoefficient, RmgError};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Hyperbolic(#[from] HyperbolicError),
    #[error(transparent)]
    Rmg(#[from] RmgError),
    #[error(transparent)]
    Rat1(#[from] Rat1Error),
    #[error(transparent)]
    Ratn(#[from] RatnError),
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub kind: &'static str,
    pub termination: Termination,
    pub t_end: f64,
    /// max |v − v₀|/v₀ over the samples, v = √(2E) for Rat₁.
    pub speed_drift: f64,
    /// Largest drift of the conserved momenta: relative to the size of
    /// A₃ψ̇ and a for the vortex pair, absolute in P for Ratₙ, relative
    /// ‖ΔP‖, ‖ΔQ‖ for Rat₁.
    pub momentum_drift: f64,
    pub min_radius: f64,
    pub max_radius: f64,
    /// Set by the Ratₙ runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reached_boundary: Option<bool>,
}

impl RunSummary {
    pub fn completed(&self) -> bool {
        self.termination.is_completed()
    }
}

pub struct RunOutput {
    pub table: CsvTable,
    pub summary: RunSummary,
}

fn stamp(table: &mut CsvTable, module: &str, spec: &OdeSpec) {
    table
        .meta("rmglab_version", env!("CARGO_PKG_VERSION"))
        .meta("module", module)
        .meta("ode_abs_tol", spec.abs_tol)
        .meta("ode_rel_tol", spec.rel_tol)
        .meta("ode_max_step", spec.max_step);
}

fn finish(table: &mut CsvTable, s: &RunSummary) {
    table
        .meta("termination", s.termination.label())
        .meta("t_end", s.t_end)
        .meta("speed_drift", format!("{:e}", s.speed_drift))
        .meta("momentum_drift", format!("{:e}", s.momentum_drift))
        .meta("min_radius", s.min_radius)
        .meta("max_radius", s.max_radius);
    if let Some(e) = s.termination.into_error() {
        table.meta("stop_reason", e);
    }
}

pub fn hyp2_field(flow: Hyp2Flow, charge: f64) -> MagneticCoefficient {
    let m = Mod2Metric::l2();
    match flow {
        Hyp2Flow::Extrinsic => m.field(FieldMode::Restricted, charge),
        Hyp2Flow::Intrinsic => m.field(FieldMode::Intrinsic, charge),
        Hyp2Flow::Geodesic => MagneticCoefficient::zero(),
    }
}

pub fn run_hyp2(cfg: &Hyp2Config) -> Result<RunOutput, RunError> {
    cfg.validate()?;
    let spec = cfg.tolerances.ode_spec()?;
    let surface = Mod2Metric::l2().reduced_surface();
    let field = hyp2_field(cfg.flow, cfg.charge);
    let st = rmg_core::ReducedState::new(cfg.s0, cfg.psi0, cfg.sdot0, cfg.psidot0);
    let traj = rmg_core::evolve(&surface, &field, st, (0.0, cfg.tmax), &spec, cfg.samples)?;

    let header = if cfg.disk {
        "t,s,psi,s_dot,psi_dot,speed,momentum,disk1_re,disk1_im,disk2_re,disk2_im"
    } else {
        "t,s,psi,s_dot,psi_dot,speed,momentum"
    };
    let mut table = CsvTable::new(header);
    stamp(&mut table, "hyperbolic-vortex", &spec);
    table
        .meta("flow", format!("{:?}", cfg.flow).to_lowercase())
        .meta("charge", cfg.charge)
        .meta("initial", format!("s0={} psi0={} sdot0={} psidot0={}", cfg.s0, cfg.psi0, cfg.sdot0, cfg.psidot0));
    // (A₃ψ̇ − a, scale of its two terms)
    let mut momenta = Vec::new();
    for smp in &traj.samples {
        let s = smp.state;
        let mom = rmg_core::angular_momentum(&surface, &field, &s).unwrap_or(f64::NAN);
        let kinetic = surface.a3(s.s) * s.psi_dot;
        momenta.push((mom, kinetic.abs().max((kinetic - mom).abs())));
        let mut row = vec![smp.t, s.s, s.psi, s.s_dot, s.psi_dot, smp.speed, mom];
        if cfg.disk {
            let pair = embed(s.s, s.psi)?;
            let (d1, d2) = (disk_map(pair.xi1), disk_map(pair.xi2));
            row.extend([d1.re, d1.im, d2.re, d2.im]);
        }
        table.push(row);
    }
    let m0 = momenta.first().map(|m| m.0).unwrap_or(0.0);
    let summary = RunSummary {
        kind: "hyp2",
        termination: traj.termination,
        t_end: traj.last_t,
        speed_drift: traj.speed_drift(),
        momentum_drift: momenta
            .iter()
            .map(|&(m, scale)| (m - m0).abs() / scale.max(m0.abs()).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max),
        min_radius: traj.min_s(),
        max_radius: traj.max_s(),
        reached_boundary: None,
    };
    finish(&mut table, &summary);
    Ok(RunOutput { table, summary })
}

pub const RAT1_HEADER: &str = "t,O11,O12,O13,O21,O22,O23,O31,O32,O33,Omega1,Omega2,Omega3,\
lambda1,lambda2,lambda3,lambda_dot1,lambda_dot2,lambda_dot3,E,P1,P2,P3,Q1,Q2,Q3,dE,dP,dQ";

pub fn run_rat1(cfg: &Rat1Config) -> Result<RunOutput, RunError> {
    cfg.validate()?;
    let spec = cfg.tolerances.ode_spec()?;
    let st = LumpState::from(&cfg.init);
    let traj = rat1::evolve(&st, (0.0, cfg.tmax), &spec, cfg.samples)?;
    let mut table = CsvTable::new(RAT1_HEADER);
    stamp(&mut table, "lump-rat1", &spec);
    let c0 = traj.samples[0].charges;
    let rel = |d: f64, n: f64| if n > 0.0 { d / n } else { d };
    let v0 = (2.0 * c0.e).sqrt();
    let mut speed_drift = 0.0f64;
    for smp in &traj.samples {
        let c = smp.charges;
        let mut row = vec![smp.t];
        row.extend(smp.state.to_vec());
        row.push(c.e);
        row.extend(c.p);
        row.extend(c.q);
        row.push(rel((c.e - c0.e).abs(), c0.e.abs()));
        row.push(rel((c.p_vec() - c0.p_vec()).norm(), c0.p_vec().norm()));
        row.push(rel((c.q_vec() - c0.q_vec()).norm(), c0.q_vec().norm()));
        table.push(row);
        speed_drift = speed_drift.max(rel(((2.0 * c.e).sqrt() - v0).abs(), v0));
    }
    let (de, dp, dq) = traj.charge_drift();
    let radii: Vec<f64> = traj.samples.iter().map(|s| s.state.lambda.norm()).collect();
    let summary = RunSummary {
        kind: "rat1",
        termination: traj.termination,
        t_end: traj.samples.last().map(|s| s.t).unwrap_or(0.0),
        speed_drift,
        momentum_drift: dp.max(dq),
        min_radius: radii.iter().copied().fold(f64::INFINITY, f64::min),
        max_radius: radii.iter().copied().fold(0.0, f64::max),
        reached_boundary: None,
    };
    table
        .meta("charge_drift_E", format!("{de:e}"))
        .meta("charge_drift_P", format!("{dp:e}"))
        .meta("charge_drift_Q", format!("{dq:e}"))
        .meta("max_orthogonality_defect", format!("{:e}", traj.max_orthogonality_defect()));
    finish(&mut table, &summary);
    Ok(RunOutput { table, summary })
}

pub fn run_ratn(cfg: &RatnConfig) -> Result<(RunOutput, InwardRun), RunError> {
    cfg.validate()?;
    let spec = cfg.tolerances.ode_spec()?;
    let geom = RatnEqGeometry::new(cfg.n)?;
    let (traj, summary) = geom.launch(cfg.mode, cfg.momentum, cfg.chi0, cfg.chi_dot0, cfg.tmax, &spec, cfg.samples)?;
    let (surface, field) = geom.as_surface(cfg.mode);
    let mut table = CsvTable::new("t,chi,psi,chi_dot,psi_dot,speed,P");
    stamp(&mut table, "lump-ratn", &spec);
    table
        .meta("n", cfg.n)
        .meta("mode", format!("{:?}", cfg.mode).to_lowercase())
        .meta("P", cfg.momentum)
        .meta("chi0", cfg.chi0);
    for smp in &traj.samples {
        let s = smp.state;
        let p = rmg_core::angular_momentum(&surface, &field, &s).unwrap_or(f64::NAN);
        table.push(vec![smp.t, s.s, s.psi, s.s_dot, s.psi_dot, smp.speed, p]);
    }
    let out = RunSummary {
        kind: "ratn",
        termination: traj.termination,
        t_end: traj.last_t,
        speed_drift: traj.speed_drift(),
        momentum_drift: summary.momentum_drift,
        min_radius: summary.chi_min,
        max_radius: traj.max_s(),
        reached_boundary: Some(summary.reached_boundary),
    };
    table.meta("reached_boundary", summary.reached_boundary);
    finish(&mut table, &out);
    Ok((RunOutput { table, summary: out }, summary))
}
