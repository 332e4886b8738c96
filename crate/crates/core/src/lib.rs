//! Numerical laboratory for Ricci magnetic geodesic (RMG) flow on soliton
//! moduli spaces: hyperbolic two-vortices, CP¹ one-lumps and equivariant
//! n-lumps.

pub mod numerics;
pub mod rmg_core;
pub mod hyperbolic;
pub mod kim_lee;
pub mod rat1;
pub mod ratn;
pub mod config;
pub mod io;
pub mod runs;
pub mod acceptance;
