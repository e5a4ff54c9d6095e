use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{EffectiveKernel, WaveField};
use crate::error::GpError;
use crate::spectral::Spectral;

/// Split-step propagator bound to one grid and kernel.
#[derive(Debug, Clone)]
pub struct GpSolver {
    spectral: Spectral,
    kernel: EffectiveKernel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    /// Largest admissible step; the actual step divides the snapshot interval.
    pub dt: f64,
    pub t_final: f64,
    pub snapshots_per_unit_time: f64,
}

impl EvolveOptions {
    pub fn new(dt: f64, t_final: f64) -> Self {
        Self {
            dt,
            t_final,
            snapshots_per_unit_time: 32.0,
        }
    }

    /// Keeps a snapshot after every step.
    pub fn every_step(dt: f64, t_final: f64) -> Self {
        Self {
            dt,
            t_final,
            snapshots_per_unit_time: 1.0 / dt,
        }
    }

    /// `(step, steps per snapshot, number of snapshot intervals)`.
    pub fn schedule(&self) -> (f64, usize, usize) {
        let intervals = (self.t_final * self.snapshots_per_unit_time).round().max(1.0) as usize;
        let interval = self.t_final / intervals as f64;
        let per = (interval / self.dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        (interval / per as f64, per, intervals)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub snapshots: Vec<WaveField>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
}

impl Trajectory {
    pub fn final_field(&self) -> &WaveField {
        self.snapshots.last().expect("trajectory holds the initial state")
    }

    pub fn max_mass_drift(&self) -> f64 {
        self.mass
            .iter()
            .map(|m| (m - self.mass[0]).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_relative_energy_drift(&self) -> f64 {
        let e0 = self.energy[0];
        let scale = if e0.abs() > 0.0 { e0.abs() } else { 1.0 };
        self.energy
            .iter()
            .map(|e| (e - e0).abs() / scale)
            .fold(0.0, f64::max)
    }
}

impl GpSolver {
    pub fn new(spectral: Spectral, kernel: EffectiveKernel) -> Self {
        Self { spectral, kernel }
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn kernel(&self) -> &EffectiveKernel {
        &self.kernel
    }

    /// `K ∗ |φ|²`.
    pub fn mean_field(&self, field: &WaveField) -> Vec<f64> {
        self.kernel.convolve(&self.spectral, &field.density())
    }

    /// `min(0.1 ε, 0.5 ε / ‖K ∗ ρ‖_∞)`.
    pub fn dt_budget(&self, field: &WaveField) -> f64 {
        budget(field.eps, &self.mean_field(field))
    }

    /// `½‖ε∇φ‖² + ½∫(K∗ρ)ρ`.
    pub fn energy(&self, field: &WaveField) -> f64 {
        let eps = field.eps;
        let kin = 0.5 * eps * eps * self.spectral.gradient_norm_sq(&field.values);
        let rho = field.density();
        let pot = self.kernel.convolve(&self.spectral, &rho);
        let int: f64 = rho.iter().zip(&pot).map(|(r, p)| r * p).sum::<f64>()
            * field.grid.cell_volume();
        kin + 0.5 * int
    }

    fn kinetic_phase(&self, eps: f64, dt: f64) -> Vec<Complex64> {
        self.spectral
            .k_squared()
            .iter()
            .map(|k2| Complex64::from_polar(1.0, -0.5 * eps * dt * k2))
            .collect()
    }

    fn half_phase(&self, values: &mut [Complex64], eps: f64, dt: f64, pot: &[f64]) {
        for (z, p) in values.iter_mut().zip(pot) {
            *z *= Complex64::from_polar(1.0, -p * dt / (2.0 * eps));
        }
    }

    fn step_in_place(
        &self,
        field: &mut WaveField,
        dt: f64,
        kinetic: &[Complex64],
        t: f64,
    ) -> Result<(), GpError> {
        let eps = field.eps;
        let pot = self.mean_field(field);
        let b = budget(eps, &pot);
        if dt > b * (1.0 + 1e-12) {
            return Err(GpError::StabilityViolation { dt, budget: b });
        }
        self.half_phase(&mut field.values, eps, dt, &pot);
        self.spectral.forward(&mut field.values);
        for (z, k) in field.values.iter_mut().zip(kinetic) {
            *z *= k;
        }
        self.spectral.inverse(&mut field.values);
        let pot = self.mean_field(field);
        self.half_phase(&mut field.values, eps, dt, &pot);
        if !field.is_finite() {
            return Err(GpError::NaNDetected { t: t + dt });
        }
        Ok(())
    }

    /// One Strang step: half nonlinear phase, exact kinetic flow, half nonlinear phase.
    pub fn strang_step(&self, field: &WaveField, dt: f64) -> Result<WaveField, GpError> {
        let mut out = field.clone();
        let kinetic = self.kinetic_phase(field.eps, dt);
        self.step_in_place(&mut out, dt, &kinetic, 0.0)?;
        Ok(out)
    }

    pub fn evolve(&self, field: &WaveField, opts: &EvolveOptions) -> Result<Trajectory, GpError> {
        if !(opts.dt > 0.0) || !(opts.t_final > 0.0) {
            return Err(GpError::InvalidSetup("step and horizon must be positive".into()));
        }
        let (dt, per, intervals) = opts.schedule();
        let kinetic = self.kinetic_phase(field.eps, dt);
        let mut cur = field.clone();
        let mut traj = Trajectory {
            dt,
            times: vec![0.0],
            snapshots: vec![cur.clone()],
            mass: vec![cur.mass()],
            energy: vec![self.energy(&cur)],
        };
        let mut step = 0usize;
        for s in 1..=intervals {
            for _ in 0..per {
                self.step_in_place(&mut cur, dt, &kinetic, step as f64 * dt)?;
                step += 1;
            }
            let t = if s == intervals {
                opts.t_final
            } else {
                (s * per) as f64 * dt
            };
            traj.times.push(t);
            traj.mass.push(cur.mass());
            traj.energy.push(self.energy(&cur));
            traj.snapshots.push(cur.clone());
        }
        Ok(traj)
    }
}

fn budget(eps: f64, pot: &[f64]) -> f64 {
    let sup = pot.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    if sup > 0.0 {
        (0.1 * eps).min(0.5 * eps / sup)
    } else {
        0.1 * eps
    }
}

/// One split step for a standalone field and kernel.
pub fn strang_step(
    field: &WaveField,
    kernel: &EffectiveKernel,
    dt: f64,
) -> Result<WaveField, GpError> {
    GpSolver::new(Spectral::new(field.grid), kernel.clone()).strang_step(field, dt)
}

/// Repeated split steps with snapshots at the default cadence.
pub fn evolve(
    field: &WaveField,
    kernel: &EffectiveKernel,
    dt: f64,
    t_final: f64,
) -> Result<Trajectory, GpError> {
    GpSolver::new(Spectral::new(field.grid), kernel.clone())
        .evolve(field, &EvolveOptions::new(dt, t_final))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    #[test]
    fn plane_wave_phase_is_exact() {
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let eps = 0.3;
        let xi = 3.0;
        let f = WaveField::from_fn(grid, eps, |x| {
            Complex64::from_polar(1.0 / (2.0 * PI).sqrt(), xi * x[0])
        });
        let traj = evolve(&f, &EffectiveKernel::zero(), 0.01, 1.0).unwrap();
        let phase = Complex64::from_polar(1.0, -eps * xi * xi / 2.0);
        let end = traj.final_field();
        let err = end
            .values
            .iter()
            .zip(&f.values)
            .map(|(a, b)| (a - b * phase).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn constant_state_rotates_at_coupling_rate() {
        let grid = Grid::new(2, 16, 1.0).unwrap();
        let eps = 0.2;
        let g = 3.0;
        let f = WaveField::from_fn(grid, eps, |_| Complex64::new(1.0, 0.0));
        let k = EffectiveKernel::delta(g);
        let traj = evolve(&f, &k, 0.01, 1.0).unwrap();
        let expected = Complex64::from_polar(1.0, -g / eps);
        for z in &traj.final_field().values {
            assert!((z - expected).norm() < 1e-11);
        }
    }

    #[test]
    fn oversized_step_is_rejected() {
        let grid = Grid::new(1, 16, 1.0).unwrap();
        let f = WaveField::from_fn(grid, 0.1, |_| Complex64::new(1.0, 0.0));
        let r = strang_step(&f, &EffectiveKernel::zero(), 0.02);
        assert!(matches!(r, Err(GpError::StabilityViolation { .. })));
    }

    #[test]
    fn schedule_divides_snapshot_interval() {
        let (dt, per, n) = EvolveOptions::new(0.01, 1.0).schedule();
        assert_eq!(n, 32);
        assert_eq!(per, 4);
        assert!((dt * (per * n) as f64 - 1.0).abs() < 1e-14);
    }
}
