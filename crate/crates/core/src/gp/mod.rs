//! Modified Gross-Pitaevskii dynamics on a periodic grid.

mod kernel;
mod observables;
mod propagate;

pub use kernel::{
    build_effective_kernel, build_squared_kernel, CorrelationProfile, EffectiveKernel, KernelMode,
};
pub(crate) use kernel::{radial_multiplier, sinc};
pub use observables::{continuity_residual, observables, ContinuityReport, DensityObservables};
pub use propagate::{evolve, strang_step, EvolveOptions, GpSolver, Trajectory};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::spectral::Grid;

/// Complex wave function sampled on a periodic grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveField {
    pub grid: Grid,
    pub eps: f64,
    pub values: Vec<Complex64>,
}

impl WaveField {
    pub fn from_fn(grid: Grid, eps: f64, f: impl Fn([f64; 3]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self { grid, eps, values }
    }

    /// WKB data `amplitude(x) · exp(i phase(x) / ε)`.
    pub fn wkb(
        grid: Grid,
        eps: f64,
        amplitude: impl Fn([f64; 3]) -> Complex64,
        phase: impl Fn([f64; 3]) -> f64,
    ) -> Self {
        Self::from_fn(grid, eps, |x| {
            amplitude(x) * Complex64::from_polar(1.0, phase(x) / eps)
        })
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn normalize(&mut self) {
        let s = 1.0 / self.mass().sqrt();
        self.values.iter_mut().for_each(|z| *z *= s);
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}
