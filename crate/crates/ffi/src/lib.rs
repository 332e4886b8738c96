//! C interface to rmglab.
//!
//! Objects cross the boundary as opaque handles created by `*_new` or
//! `*_evolve` functions and released with the matching `*_free`. Every
//! fallible function returns an [`RmgStatus`]; on failure a message is kept
//! per thread and can be read with [`rmg_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use rmglab::config::Hyp2Flow;
use rmglab::hyperbolic::Mod2Metric;
use rmglab::numerics::{OdeSpec, Termination};
use rmglab::rat1::{energy_and_momenta, LumpState, LumpStateDoc, LumpTrajectory};
use rmglab::ratn::{PotentialMode, RatnEqGeometry};
use rmglab::rmg_core::{self, ReducedState, Trajectory};
use rmglab::runs::hyp2_field;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RmgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NumericalFailure = 3,
    IndexOutOfRange = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RmgTermination {
    Completed = 0,
    StepSizeCollapse = 1,
    DomainExit = 2,
    BudgetExceeded = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RmgFlow {
    Extrinsic = 0,
    Intrinsic = 1,
    Geodesic = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RmgPotentialMode {
    Extrinsic = 0,
    Intrinsic = 1,
}

/// Integrator settings; zero fields take the library defaults.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct RmgOdeOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

/// Lump state; `o` is row-major.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct RmgLumpState {
    pub o: [f64; 9],
    pub omega: [f64; 3],
    pub lambda: [f64; 3],
    pub lambda_dot: [f64; 3],
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct RmgCharges {
    pub e: f64,
    pub p: [f64; 3],
    pub q: [f64; 3],
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct RmgReducedSample {
    pub t: f64,
    pub s: f64,
    pub psi: f64,
    pub s_dot: f64,
    pub psi_dot: f64,
    pub speed: f64,
}

/// Reduced (s, ψ) trajectory.
pub struct RmgReducedTrajectory(Trajectory);

/// Lump trajectory.
pub struct RmgLumpTrajectory(LumpTrajectory);

/// Equivariant n-lump geometry.
pub struct RmgRatnGeometry(RatnEqGeometry);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(RmgStatus, String);

impl Failure {
    fn invalid(msg: impl Into<String>) -> Self {
        Failure(RmgStatus::InvalidArgument, msg.into())
    }

    fn numerical(e: impl std::fmt::Display) -> Self {
        Failure(RmgStatus::NumericalFailure, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RmgStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| p.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "panic".into());
        Err(Failure(RmgStatus::Panic, msg))
    });
    match outcome {
        Ok(()) => {
            LAST_ERROR.with(|e| e.borrow_mut().clear());
            RmgStatus::Ok
        }
        Err(Failure(code, msg)) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = msg);
            code
        }
    }
}

fn null() -> Failure {
    Failure(RmgStatus::NullPointer, "null pointer argument".into())
}

unsafe fn out_ref<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(null)
}

unsafe fn in_ref<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

fn ode_spec(opts: *const RmgOdeOptions) -> Result<OdeSpec, Failure> {
    let mut spec = OdeSpec::default();
    if let Some(o) = unsafe { opts.as_ref() } {
        if o.abs_tol != 0.0 {
            spec.abs_tol = o.abs_tol;
        }
        if o.rel_tol != 0.0 {
            spec.rel_tol = o.rel_tol;
        }
        if o.max_step != 0.0 {
            spec.max_step = o.max_step;
        }
        if o.max_steps != 0 {
            spec.max_steps = o.max_steps;
        }
    }
    spec.validate().map_err(|e| Failure::invalid(e.to_string()))?;
    Ok(spec)
}

fn termination_code(t: &Termination) -> RmgTermination {
    match t {
        Termination::Completed => RmgTermination::Completed,
        Termination::StepSizeCollapse { .. } => RmgTermination::StepSizeCollapse,
        Termination::DomainExit { .. } => RmgTermination::DomainExit,
        Termination::BudgetExceeded { .. } => RmgTermination::BudgetExceeded,
    }
}

fn potential_mode(m: RmgPotentialMode) -> PotentialMode {
    match m {
        RmgPotentialMode::Extrinsic => PotentialMode::Extrinsic,
        RmgPotentialMode::Intrinsic => PotentialMode::Intrinsic,
    }
}

fn lump_state(s: &RmgLumpState) -> LumpState {
    LumpState::from(&LumpStateDoc {
        o: s.o,
        omega: s.omega,
        lambda: s.lambda,
        lambda_dot: s.lambda_dot,
    })
}

fn charges(st: &LumpState) -> RmgCharges {
    let c = energy_and_momenta(st);
    RmgCharges { e: c.e, p: c.p, q: c.q }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rmg_version() -> *const c_char {
    static V: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    V.as_ptr()
}

/// Copies the calling thread's last error message into `buf` (truncated and
/// NUL-terminated) and returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn rmg_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Profile of the hyperbolic two-vortex metric at separation s > 0:
/// `out[9]` = (s, A, A₁, A₂, A₃, A₄, C, F restricted, F intrinsic).
///
/// # Safety
/// `out` must be valid for 9 doubles.
#[no_mangle]
pub unsafe extern "C" fn rmg_hyp2_profile(s: f64, out: *mut f64) -> RmgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let row = Mod2Metric::l2().profile_row(s).map_err(|e| Failure::invalid(e.to_string()))?;
        std::slice::from_raw_parts_mut(out, 9).copy_from_slice(&row);
        Ok(())
    })
}

/// Integrates the reduced vortex-pair flow. An early stop still yields a
/// trajectory; query it with [`rmg_reduced_trajectory_termination`].
///
/// # Safety
/// `out` must be valid for writing; `opts` may be null.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn rmg_hyp2_evolve(
    flow: RmgFlow,
    charge: f64,
    initial: RmgReducedSample,
    t_max: f64,
    samples: usize,
    opts: *const RmgOdeOptions,
    out: *mut *mut RmgReducedTrajectory,
) -> RmgStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = std::ptr::null_mut();
        if !(initial.s > 0.0 && t_max > 0.0 && charge.is_finite()) || samples < 2 {
            return Err(Failure::invalid("need s > 0, t_max > 0, finite charge and samples >= 2"));
        }
        let spec = ode_spec(opts)?;
        let flow = match flow {
            RmgFlow::Extrinsic => Hyp2Flow::Extrinsic,
            RmgFlow::Intrinsic => Hyp2Flow::Intrinsic,
            RmgFlow::Geodesic => Hyp2Flow::Geodesic,
        };
        let surface = Mod2Metric::l2().reduced_surface();
        let field = hyp2_field(flow, charge);
        let st = ReducedState::new(initial.s, initial.psi, initial.s_dot, initial.psi_dot);
        let traj = rmg_core::evolve(&surface, &field, st, (0.0, t_max), &spec, samples).map_err(Failure::numerical)?;
        *out = Box::into_raw(Box::new(RmgReducedTrajectory(traj)));
        Ok(())
    })
}

/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rmg_reduced_trajectory_len(traj: *const RmgReducedTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.samples.len())
}

/// # Safety
/// `traj` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn rmg_reduced_trajectory_sample(
    traj: *const RmgReducedTrajectory,
    index: usize,
    out: *mut RmgReducedSample,
) -> RmgStatus {
    guard(|| {
        let t = in_ref(traj)?;
        let out = out_ref(out)?;
        let smp = t
            .0
            .samples
            .get(index)
            .ok_or_else(|| Failure(RmgStatus::IndexOutOfRange, format!("sample {index} out of range")))?;
        let s = smp.state;
        *out = RmgReducedSample {
            t: smp.t,
            s: s.s,
            psi: s.psi,
            s_dot: s.s_dot,
            psi_dot: s.psi_dot,
            speed: smp.speed,
        };
        Ok(())
    })
}

/// # Safety
/// `traj` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rmg_reduced_trajectory_termination(traj: *const RmgReducedTrajectory) -> RmgTermination {
    traj.as_ref()
        .map_or(RmgTermination::Completed, |t| termination_code(&t.0.termination))
}

/// # Safety
/// `traj` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rmg_reduced_trajectory_free(traj: *mut RmgReducedTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Energy and the two conserved momenta of a lump state.
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rmg_lump_charges(state: *const RmgLumpState, out: *mut RmgCharges) -> RmgStatus {
    guard(|| {
        let st = lump_state(in_ref(state)?);
        let out = out_ref(out)?;
        if st.lambda.norm() == 0.0 || st.to_vec().iter().any(|v| !v.is_finite()) {
            return Err(Failure::invalid("state must be finite with λ ≠ 0"));
        }
        *out = charges(&st);
        Ok(())
    })
}

/// Integrates the lump flow over [0, t_max].
///
/// # Safety
/// `state` and `out` must be valid; `opts` may be null.
#[no_mangle]
pub unsafe extern "C" fn rmg_lump_evolve(
    state: *const RmgLumpState,
    t_max: f64,
    samples: usize,
    opts: *const RmgOdeOptions,
    out: *mut *mut RmgLumpTrajectory,
) -> RmgStatus {
    guard(|| {
        let st = lump_state(in_ref(state)?);
        let out = out_ref(out)?;
        *out = std::ptr::null_mut();
        if !(t_max > 0.0) || samples < 2 {
            return Err(Failure::invalid("need t_max > 0 and samples >= 2"));
        }
        if st.to_vec().iter().any(|v| !v.is_finite()) || st.orthogonality_defect() > 1e-8 {
            return Err(Failure::invalid("state must be finite with orthogonal O"));
        }
        let spec = ode_spec(opts)?;
        let traj = rmglab::rat1::evolve(&st, (0.0, t_max), &spec, samples).map_err(Failure::numerical)?;
        *out = Box::into_raw(Box::new(RmgLumpTrajectory(traj)));
        Ok(())
    })
}

/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rmg_lump_trajectory_len(traj: *const RmgLumpTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.samples.len())
}

/// Sample `index`; any of `t`, `state`, `charges` may be null.
///
/// # Safety
/// `traj` must be a live handle; non-null outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn rmg_lump_trajectory_sample(
    traj: *const RmgLumpTrajectory,
    index: usize,
    t: *mut f64,
    state: *mut RmgLumpState,
    charges_out: *mut RmgCharges,
) -> RmgStatus {
    guard(|| {
        let tr = in_ref(traj)?;
        let smp = tr
            .0
            .samples
            .get(index)
            .ok_or_else(|| Failure(RmgStatus::IndexOutOfRange, format!("sample {index} out of range")))?;
        if let Some(t) = t.as_mut() {
            *t = smp.t;
        }
        if let Some(s) = state.as_mut() {
            let d = LumpStateDoc::from(&smp.state);
            *s = RmgLumpState {
                o: d.o,
                omega: d.omega,
                lambda: d.lambda,
                lambda_dot: d.lambda_dot,
            };
        }
        if let Some(c) = charges_out.as_mut() {
            *c = RmgCharges {
                e: smp.charges.e,
                p: smp.charges.p,
                q: smp.charges.q,
            };
        }
        Ok(())
    })
}

/// # Safety
/// `traj` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rmg_lump_trajectory_termination(traj: *const RmgLumpTrajectory) -> RmgTermination {
    traj.as_ref()
        .map_or(RmgTermination::Completed, |t| termination_code(&t.0.termination))
}

/// # Safety
/// `traj` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rmg_lump_trajectory_free(traj: *mut RmgLumpTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn rmg_ratn_geometry_new(n: u32, out: *mut *mut RmgRatnGeometry) -> RmgStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = std::ptr::null_mut();
        let g = RatnEqGeometry::new(n).map_err(|e| Failure::invalid(e.to_string()))?;
        *out = Box::into_raw(Box::new(RmgRatnGeometry(g)));
        Ok(())
    })
}

/// # Safety
/// `geom` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rmg_ratn_geometry_free(geom: *mut RmgRatnGeometry) {
    if !geom.is_null() {
        drop(Box::from_raw(geom));
    }
}

/// Metric function F_n(ρ).
///
/// # Safety
/// `geom` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rmg_ratn_f_metric(geom: *const RmgRatnGeometry, rho: f64, out: *mut f64) -> RmgStatus {
    guard(|| {
        let g = in_ref(geom)?;
        *out_ref(out)? = g.0.f_metric(rho).map_err(|e| Failure::invalid(e.to_string()))?;
        Ok(())
    })
}

/// Effective potential V_P(χ).
///
/// # Safety
/// `geom` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rmg_ratn_effective_potential(
    geom: *const RmgRatnGeometry,
    momentum: f64,
    chi: f64,
    mode: RmgPotentialMode,
    out: *mut f64,
) -> RmgStatus {
    guard(|| {
        let g = in_ref(geom)?;
        let v = g
            .0
            .effective_potential(momentum, chi, potential_mode(mode))
            .map_err(|e| Failure::invalid(e.to_string()))?;
        *out_ref(out)? = v;
        Ok(())
    })
}

/// Profile row `out[6]` = (χ, F_n, a restricted, a intrinsic, V ext, V int).
///
/// # Safety
/// `geom` must be a live handle and `out` valid for 6 doubles.
#[no_mangle]
pub unsafe extern "C" fn rmg_ratn_profile_row(
    geom: *const RmgRatnGeometry,
    chi: f64,
    momentum: f64,
    out: *mut f64,
) -> RmgStatus {
    guard(|| {
        let g = in_ref(geom)?;
        if out.is_null() {
            return Err(null());
        }
        let row = g.0.profile_row(chi, momentum).map_err(|e| Failure::invalid(e.to_string()))?;
        std::slice::from_raw_parts_mut(out, 6).copy_from_slice(&row);
        Ok(())
    })
}
