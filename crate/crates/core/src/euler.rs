//! Pseudo-spectral compressible Euler equations with pressure `c ρ² / 2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::EulerError;
use crate::spectral::{Grid, Spectral};

const BLOW_UP_FACTOR: f64 = 50.0;
const UNDERSHOOT: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluidState {
    pub grid: Grid,
    pub rho: Vec<f64>,
    /// Velocity, one grid per axis.
    pub u: Vec<Vec<f64>>,
    pub c: f64,
    pub time: f64,
}

impl FluidState {
    pub fn from_fn(
        grid: Grid,
        c: f64,
        rho: impl Fn([f64; 3]) -> f64,
        u: impl Fn([f64; 3]) -> [f64; 3],
    ) -> Self {
        let pts: Vec<[f64; 3]> = (0..grid.len()).map(|i| grid.point(i)).collect();
        let rho = pts.iter().map(|x| rho(*x)).collect();
        let vel: Vec<[f64; 3]> = pts.iter().map(|x| u(*x)).collect();
        let u = (0..grid.dim)
            .map(|a| vel.iter().map(|w| w[a]).collect())
            .collect();
        Self {
            grid,
            rho,
            u,
            c,
            time: 0.0,
        }
    }

    pub fn mass(&self) -> f64 {
        self.grid.integrate(&self.rho)
    }

    /// `∫ ρ u dx` per axis.
    pub fn momentum(&self) -> Vec<f64> {
        self.u
            .iter()
            .map(|ua| {
                let p: Vec<f64> = ua.iter().zip(&self.rho).map(|(u, r)| u * r).collect();
                self.grid.integrate(&p)
            })
            .collect()
    }

    /// `∫ (½ ρ |u|² + (c/2) ρ²) dx`.
    pub fn energy(&self) -> f64 {
        let e: Vec<f64> = (0..self.rho.len())
            .map(|i| {
                let u2: f64 = self.u.iter().map(|ua| ua[i] * ua[i]).sum();
                0.5 * self.rho[i] * u2 + 0.5 * self.c * self.rho[i] * self.rho[i]
            })
            .collect();
        self.grid.integrate(&e)
    }

    fn axpy(&self, a: f64, d: &(Vec<f64>, Vec<Vec<f64>>)) -> Self {
        let mut out = self.clone();
        out.rho.iter_mut().zip(&d.0).for_each(|(r, x)| *r += a * x);
        for (ua, da) in out.u.iter_mut().zip(&d.1) {
            ua.iter_mut().zip(da).for_each(|(u, x)| *u += a * x);
        }
        out
    }

    /// Velocity reversed in place.
    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        out.u.iter_mut().for_each(|ua| ua.iter_mut().for_each(|u| *u = -*u));
        out
    }

    fn sup(values: &[f64]) -> f64 {
        values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Terminal status of an Euler run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EulerStatus {
    Completed,
    /// `‖∇u‖_∞` exceeded the blow-up threshold at `time`.
    BlowUpProxy { time: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerTrajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub states: Vec<FluidState>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    pub momentum: Vec<Vec<f64>>,
    /// CFL number at each snapshot.
    pub cfl: Vec<f64>,
    pub status: EulerStatus,
}

impl EulerTrajectory {
    pub fn final_state(&self) -> &FluidState {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn max_relative_energy_drift(&self) -> f64 {
        let e0 = self.energy[0];
        self.energy
            .iter()
            .map(|e| (e - e0).abs() / e0.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct EulerSolver {
    spectral: Spectral,
    keep: Vec<bool>,
}

impl EulerSolver {
    pub fn new(grid: Grid) -> Self {
        let cutoff = grid.n as i64 / 3;
        let keep = (0..grid.len())
            .map(|i| {
                let m = grid.multi_index(i);
                (0..grid.dim).all(|a| grid.frequency(m[a]).abs() <= cutoff)
            })
            .collect();
        Self {
            spectral: Spectral::new(grid),
            keep,
        }
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    fn dealiased_hat(&self, values: &[f64]) -> Vec<Complex64> {
        let mut hat = self.spectral.forward_real(values);
        hat.iter_mut()
            .zip(&self.keep)
            .filter(|(_, k)| !**k)
            .for_each(|(z, _)| *z = Complex64::new(0.0, 0.0));
        hat
    }

    fn dealias(&self, values: &[f64]) -> Vec<f64> {
        let mut hat = self.dealiased_hat(values);
        self.spectral.inverse(&mut hat);
        hat.iter().map(|z| z.re).collect()
    }

    /// `(-∇·(ρu), -(u·∇)u - c∇ρ)`.
    pub fn rhs(&self, state: &FluidState) -> (Vec<f64>, Vec<Vec<f64>>) {
        let grid = state.grid;
        let dim = grid.dim;
        let n = grid.len();
        let mut div = vec![Complex64::new(0.0, 0.0); n];
        for a in 0..dim {
            let flux: Vec<f64> = state.u[a].iter().zip(&state.rho).map(|(u, r)| u * r).collect();
            let hat = self.dealiased_hat(&flux);
            for (i, (d, z)) in div.iter_mut().zip(&hat).enumerate() {
                *d += z * Complex64::new(0.0, self.spectral.k_odd_component(i, a));
            }
        }
        self.spectral.inverse(&mut div);
        let drho: Vec<f64> = div.iter().map(|z| -z.re).collect();

        let grad_rho = self.spectral.gradient_real(&state.rho);
        let grads: Vec<Vec<Vec<f64>>> = state
            .u
            .iter()
            .map(|ua| self.spectral.gradient_real(ua))
            .collect();
        let du = (0..dim)
            .map(|a| {
                let adv: Vec<f64> = (0..n)
                    .map(|i| (0..dim).map(|b| state.u[b][i] * grads[a][b][i]).sum())
                    .collect();
                let adv = self.dealias(&adv);
                (0..n).map(|i| -adv[i] - state.c * grad_rho[a][i]).collect()
            })
            .collect();
        (drho, du)
    }

    /// `‖∇u‖_∞` over all components.
    pub fn velocity_gradient_sup(&self, state: &FluidState) -> f64 {
        state
            .u
            .iter()
            .flat_map(|ua| self.spectral.gradient_real(ua))
            .map(|g| FluidState::sup(&g))
            .fold(0.0, f64::max)
    }

    /// `dt (‖u‖_∞ + sqrt(2c‖ρ‖_∞)) k_max`.
    pub fn cfl_number(&self, state: &FluidState, dt: f64) -> f64 {
        let umax = state.u.iter().map(|ua| FluidState::sup(ua)).fold(0.0, f64::max);
        let speed = umax + (2.0 * state.c * FluidState::sup(&state.rho)).sqrt();
        dt * speed * state.grid.k_max()
    }

    fn rk4(&self, s: &FluidState, dt: f64) -> FluidState {
        let k1 = self.rhs(s);
        let k2 = self.rhs(&s.axpy(0.5 * dt, &k1));
        let k3 = self.rhs(&s.axpy(0.5 * dt, &k2));
        let k4 = self.rhs(&s.axpy(dt, &k3));
        let mut out = s.clone();
        let w = dt / 6.0;
        for i in 0..out.rho.len() {
            out.rho[i] += w * (k1.0[i] + 2.0 * k2.0[i] + 2.0 * k3.0[i] + k4.0[i]);
        }
        for a in 0..out.u.len() {
            for i in 0..out.rho.len() {
                out.u[a][i] += w * (k1.1[a][i] + 2.0 * k2.1[a][i] + 2.0 * k3.1[a][i] + k4.1[a][i]);
            }
        }
        out.time = s.time + dt;
        out
    }

    /// RK4 steps of size at most `dt` up to `t_final`, with `snapshots` evenly spaced records.
    pub fn evolve(
        &self,
        state: &FluidState,
        dt: f64,
        t_final: f64,
        snapshots: usize,
    ) -> Result<EulerTrajectory, EulerError> {
        if !(dt > 0.0) || !(t_final > 0.0) || snapshots == 0 {
            return Err(EulerError::InvalidSetup(
                "step, horizon and snapshot count must be positive".into(),
            ));
        }
        let interval = t_final / snapshots as f64;
        let per = (interval / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let h = interval / per as f64;
        let reference = self
            .velocity_gradient_sup(state)
            .max((state.c * FluidState::sup(&state.rho)).sqrt() * state.grid.dk());
        let threshold = BLOW_UP_FACTOR * reference;
        let mut cur = state.clone();
        let mut traj = EulerTrajectory {
            dt: h,
            times: vec![state.time],
            states: vec![cur.clone()],
            mass: vec![cur.mass()],
            energy: vec![cur.energy()],
            momentum: vec![cur.momentum()],
            cfl: vec![self.cfl_number(&cur, h)],
            status: EulerStatus::Completed,
        };
        let t0 = state.time;
        for s in 1..=snapshots {
            for _ in 0..per {
                let cfl = self.cfl_number(&cur, h);
                if cfl > 1.0 {
                    return Err(EulerError::CFLViolation {
                        dt: h,
                        limit: h / cfl,
                    });
                }
                cur = self.rk4(&cur, h);
                if cur.rho.iter().any(|r| !r.is_finite())
                    || cur.u.iter().flatten().any(|u| !u.is_finite())
                {
                    return Err(EulerError::NaNDetected { t: cur.time });
                }
                if self.velocity_gradient_sup(&cur) > threshold {
                    traj.status = EulerStatus::BlowUpProxy { time: cur.time };
                    return Ok(traj);
                }
                let min = cur.rho.iter().cloned().fold(f64::INFINITY, f64::min);
                if min < -UNDERSHOOT {
                    return Err(EulerError::NegativeDensity { min, t: cur.time });
                }
            }
            cur.time = t0 + s as f64 * interval;
            traj.times.push(cur.time);
            traj.mass.push(cur.mass());
            traj.energy.push(cur.energy());
            traj.momentum.push(cur.momentum());
            traj.cfl.push(self.cfl_number(&cur, h));
            traj.states.push(cur.clone());
        }
        Ok(traj)
    }
}

/// `(drho, du)` for a standalone state.
pub fn euler_rhs(state: &FluidState) -> (Vec<f64>, Vec<Vec<f64>>) {
    EulerSolver::new(state.grid).rhs(state)
}

/// Evolves with 32 snapshots per unit time.
pub fn evolve_euler(state: &FluidState, dt: f64, t_final: f64) -> Result<EulerTrajectory, EulerError> {
    let snaps = (t_final * 32.0).round().max(1.0) as usize;
    EulerSolver::new(state.grid).evolve(state, dt, t_final, snaps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn stationary_state_has_zero_rhs() {
        let grid = Grid::new(2, 16, 2.0 * PI).unwrap();
        let s = FluidState::from_fn(grid, 2.0, |_| 0.3, |_| [0.0; 3]);
        let (dr, du) = euler_rhs(&s);
        assert!(dr.iter().chain(du.iter().flatten()).all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn cfl_violation_is_reported() {
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let s = FluidState::from_fn(grid, 1.0, |_| 1.0, |_| [1.0, 0.0, 0.0]);
        let r = EulerSolver::new(grid).evolve(&s, 0.5, 1.0, 1);
        assert!(matches!(r, Err(EulerError::CFLViolation { .. })));
    }

    #[test]
    fn steepening_wave_trips_blow_up_proxy() {
        let grid = Grid::new(1, 1024, 2.0 * PI).unwrap();
        let s = FluidState::from_fn(grid, 1.0, |_| 1.0, |x| [3.0 * x[0].sin(), 0.0, 0.0]);
        let traj = EulerSolver::new(grid).evolve(&s, 2e-4, 2.0, 20).unwrap();
        match traj.status {
            EulerStatus::BlowUpProxy { time } => assert!(time < 1.0),
            EulerStatus::Completed => panic!("Burgers shock must trip the proxy"),
        }
    }
}
