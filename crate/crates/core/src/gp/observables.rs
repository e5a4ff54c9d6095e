use serde::{Deserialize, Serialize};

use super::{EffectiveKernel, GpSolver, Trajectory, WaveField};
use crate::error::GpError;
use crate::spectral::Spectral;

/// Local densities of a wave function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityObservables {
    pub rho: Vec<f64>,
    /// Momentum density `Im(ε∇φ φ̄)`, one grid per axis.
    pub j: Vec<Vec<f64>>,
    pub e_kin: Vec<f64>,
    pub e_int: Vec<f64>,
    /// Stress `Re(ε∂_a φ conj(ε∂_b φ))`, indexed `[a][b]`.
    pub sigma: Vec<Vec<Vec<f64>>>,
    /// `(ε²/4)Δρ - ½(K∗ρ)ρ`.
    pub p: Vec<f64>,
    /// `½(ρ (K ∗ ∇ρ) - (K∗ρ) ∇ρ)`, one grid per axis.
    pub l: Vec<Vec<f64>>,
}

pub(crate) fn compute(
    spectral: &Spectral,
    kernel: &EffectiveKernel,
    field: &WaveField,
) -> DensityObservables {
    let eps = field.eps;
    let dim = field.grid.dim;
    let rho = field.density();
    let grad: Vec<Vec<_>> = spectral
        .gradient(&field.values)
        .into_iter()
        .map(|g| g.into_iter().map(|z| z * eps).collect())
        .collect();
    let j: Vec<Vec<f64>> = grad
        .iter()
        .map(|g| {
            g.iter()
                .zip(&field.values)
                .map(|(d, z)| (d * z.conj()).im)
                .collect()
        })
        .collect();
    let e_kin: Vec<f64> = (0..rho.len())
        .map(|i| 0.5 * grad.iter().map(|g| g[i].norm_sqr()).sum::<f64>())
        .collect();
    let sigma: Vec<Vec<Vec<f64>>> = (0..dim)
        .map(|a| {
            (0..dim)
                .map(|b| {
                    grad[a]
                        .iter()
                        .zip(&grad[b])
                        .map(|(x, y)| (x * y.conj()).re)
                        .collect()
                })
                .collect()
        })
        .collect();
    let pot = kernel.convolve(spectral, &rho);
    let e_int: Vec<f64> = rho.iter().zip(&pot).map(|(r, v)| 0.5 * r * v).collect();
    let lap = spectral.laplacian_real(&rho);
    let p: Vec<f64> = lap
        .iter()
        .zip(&e_int)
        .map(|(d, e)| 0.25 * eps * eps * d - e)
        .collect();
    let grad_rho = spectral.gradient_real(&rho);
    let l = grad_rho
        .iter()
        .map(|gr| {
            let conv = kernel.convolve(spectral, gr);
            (0..rho.len())
                .map(|i| 0.5 * (rho[i] * conv[i] - pot[i] * gr[i]))
                .collect()
        })
        .collect();
    DensityObservables {
        rho,
        j,
        e_kin,
        e_int,
        sigma,
        p,
        l,
    }
}

/// Local densities of `field` under `kernel`.
pub fn observables(field: &WaveField, kernel: &EffectiveKernel) -> DensityObservables {
    compute(&Spectral::new(field.grid), kernel, field)
}

impl GpSolver {
    pub fn observables(&self, field: &WaveField) -> DensityObservables {
        compute(self.spectral(), self.kernel(), field)
    }
}

/// Discrete balance-law residuals along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    /// Max over interior snapshots of `‖∂_tρ + ∇·J‖_{L²}`.
    pub mass_residual: f64,
    /// Max over interior snapshots of `‖∂_tJ + ∇·(σ - P I) + l‖_{L²}`.
    pub momentum_residual: f64,
    /// Max over snapshots and axes of `|∫ l dx|`.
    pub l_integral: f64,
}

/// Mass and momentum balance residuals by centred time differences.
pub fn continuity_residual(
    traj: &Trajectory,
    kernel: &EffectiveKernel,
) -> Result<ContinuityReport, GpError> {
    let n = traj.snapshots.len();
    if n < 3 {
        return Err(GpError::InsufficientSnapshots(n));
    }
    let grid = traj.snapshots[0].grid;
    let spectral = Spectral::new(grid);
    let obs: Vec<DensityObservables> = traj
        .snapshots
        .iter()
        .map(|f| compute(&spectral, kernel, f))
        .collect();
    let dim = grid.dim;
    let mut l_integral: f64 = 0.0;
    for o in &obs {
        for lj in &o.l {
            l_integral = l_integral.max(grid.integrate(lj).abs());
        }
    }
    let mut mass_residual: f64 = 0.0;
    let mut momentum_residual: f64 = 0.0;
    for i in 1..n - 1 {
        let dt = traj.times[i + 1] - traj.times[i - 1];
        let div_j = spectral.divergence(&obs[i].j);
        let r: Vec<f64> = (0..grid.len())
            .map(|x| (obs[i + 1].rho[x] - obs[i - 1].rho[x]) / dt + div_j[x])
            .collect();
        mass_residual = mass_residual.max(grid.l2_norm(&r));
        let mut sq = 0.0;
        for a in 0..dim {
            let flux: Vec<Vec<f64>> = (0..dim)
                .map(|b| {
                    obs[i].sigma[a][b]
                        .iter()
                        .zip(&obs[i].p)
                        .map(|(s, p)| if a == b { s - p } else { *s })
                        .collect()
                })
                .collect();
            let div = spectral.divergence(&flux);
            let r: Vec<f64> = (0..grid.len())
                .map(|x| (obs[i + 1].j[a][x] - obs[i - 1].j[a][x]) / dt + div[x] + obs[i].l[a][x])
                .collect();
            sq += grid.l2_norm(&r).powi(2);
        }
        momentum_residual = momentum_residual.max(sq.sqrt());
    }
    Ok(ContinuityReport {
        mass_residual,
        momentum_residual,
        l_integral,
    })
}
