//! RMG flow on the CP¹ one-lump space Rat₁ = SO(3) × ℝ³.

pub mod asymptotics;
pub mod dynamics;
pub mod metric;
pub mod reduced;

pub use dynamics::{energy_and_momenta, eom, evolve, Charges, LumpState, LumpStateDoc, LumpTrajectory, ESCAPE_RADIUS};
pub use metric::{Rat1Error, Rat1Metric, Rat1Point};
