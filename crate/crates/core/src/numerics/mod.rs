//! Shared numerical kernel.

pub mod diff;
pub mod extrap;
pub mod jet;
pub mod ode;
pub mod quad;
pub mod root;

pub use diff::finite_diff;
pub use extrap::{extrapolate_to_zero, poly_fit};
pub use jet::Jet;
pub use ode::{integrate, linspace, ode_solve, OdeRun, OdeSpec, OutOfDomain, Termination};
pub use quad::{quad_adaptive, quad_multiscale, quad_multiscale_vec, quad_semi_infinite, quad_tail, QuadratureSpec};
pub use root::find_root;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    #[error("quadrature did not converge (estimate {estimate:e}, error {error:e})")]
    NonConvergence { estimate: f64, error: f64 },
    #[error("step size collapsed to {h:e} at t = {t}")]
    StepSizeCollapse { t: f64, h: f64 },
    #[error("trajectory left the domain at t = {t}")]
    DomainExit { t: f64 },
    #[error("step budget exhausted after {steps} steps at t = {t}")]
    BudgetExceeded { t: f64, steps: usize },
    #[error("invalid bracket [{lo}, {hi}]: f = {f_lo:e}, {f_hi:e}")]
    InvalidBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
}
