//! Numerical laboratory for zero-energy scattering, effective condensate
//! dynamics and their semiclassical limits.

pub mod eikonal;
pub mod diagnostics;
pub mod error;
pub mod euler;
pub mod gp;
pub mod numerics;
pub mod pair;
pub mod potential;
pub mod regime;
pub mod scattering;
pub mod spectral;

pub use error::*;
pub use potential::{capacity, PotentialKind, PotentialSpec, RadialPotential};
pub use regime::{Regime, RegimeParams};
