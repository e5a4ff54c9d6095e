//! Eikonal phase and amplitude transport by the method of characteristics.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::EikonalError;
use crate::gp::WaveField;
use crate::numerics::{cubic_weights, integrate_gl};
use crate::spectral::Grid;

const NEWTON_MAX_ITER: usize = 50;
const NEWTON_TOL: f64 = 1e-12;

/// `amp · sin(k·x + theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigMode {
    pub amp: f64,
    pub k: [f64; 3],
    #[serde(default)]
    pub theta: f64,
}

/// Initial phase `xi·x + (quad/2)|x - center|² + Σ amp sin(k·x + theta)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InitialPhase {
    #[serde(default)]
    pub xi: [f64; 3],
    #[serde(default)]
    pub quad: f64,
    #[serde(default)]
    pub center: [f64; 3],
    #[serde(default)]
    pub modes: Vec<TrigMode>,
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl InitialPhase {
    pub fn linear(xi: [f64; 3]) -> Self {
        Self {
            xi,
            ..Self::default()
        }
    }

    pub fn quadratic(quad: f64, center: [f64; 3]) -> Self {
        Self {
            quad,
            center,
            ..Self::default()
        }
    }

    pub fn with_mode(mut self, amp: f64, k: [f64; 3], theta: f64) -> Self {
        self.modes.push(TrigMode { amp, k, theta });
        self
    }

    pub fn value(&self, x: [f64; 3]) -> f64 {
        let d = [x[0] - self.center[0], x[1] - self.center[1], x[2] - self.center[2]];
        dot(&self.xi, &x)
            + 0.5 * self.quad * dot(&d, &d)
            + self
                .modes
                .iter()
                .map(|m| m.amp * (dot(&m.k, &x) + m.theta).sin())
                .sum::<f64>()
    }

    pub fn gradient(&self, x: [f64; 3]) -> [f64; 3] {
        let mut g = [0.0; 3];
        for a in 0..3 {
            g[a] = self.xi[a] + self.quad * (x[a] - self.center[a]);
        }
        for m in &self.modes {
            let c = m.amp * (dot(&m.k, &x) + m.theta).cos();
            for a in 0..3 {
                g[a] += c * m.k[a];
            }
        }
        g
    }

    /// Hessian restricted to the first `dim` axes; the remaining block is zero.
    pub fn hessian(&self, x: [f64; 3], dim: usize) -> Matrix3<f64> {
        let mut h = Matrix3::zeros();
        for a in 0..dim {
            h[(a, a)] = self.quad;
        }
        for m in &self.modes {
            let s = -m.amp * (dot(&m.k, &x) + m.theta).sin();
            for a in 0..dim {
                for b in 0..dim {
                    h[(a, b)] += s * m.k[a] * m.k[b];
                }
            }
        }
        h
    }

    fn eigenvalues(&self, x: [f64; 3], dim: usize) -> Vec<f64> {
        let h = self.hessian(x, dim);
        let e = h.symmetric_eigen().eigenvalues;
        let mut ev: Vec<f64> = e.iter().cloned().collect();
        ev.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
        // The padded block contributes the zero eigenvalues with the smallest magnitude.
        ev.split_off(3 - dim)
    }

    fn validate(&self, dim: usize) -> Result<(), EikonalError> {
        let beyond = |v: &[f64; 3]| v[dim..].iter().any(|c| *c != 0.0);
        if beyond(&self.xi) || self.modes.iter().any(|m| beyond(&m.k)) {
            return Err(EikonalError::InvalidSetup(format!(
                "phase has components beyond dimension {dim}"
            )));
        }
        Ok(())
    }

    /// Requires `exp(i phase / ε)` to be periodic on `grid`, apart from the quadratic part.
    pub fn check_commensurate(&self, grid: &Grid, eps: f64) -> Result<(), EikonalError> {
        self.validate(grid.dim)?;
        let turns = |v: f64| v * grid.box_len / (2.0 * PI);
        let integral = |v: f64| (v - v.round()).abs() <= 1e-9 * v.abs().max(1.0);
        if !self.xi.iter().all(|x| integral(turns(*x / eps))) {
            return Err(EikonalError::IncommensuratePhase(self.xi.to_vec()));
        }
        for m in &self.modes {
            if !m.k.iter().all(|k| integral(turns(*k))) {
                return Err(EikonalError::IncommensuratePhase(m.k.to_vec()));
            }
        }
        Ok(())
    }
}

/// First time at which `det(I + t D²φ_in)` vanishes at some grid node, or `+∞`.
pub fn caustic_time(phase: &InitialPhase, grid: &Grid) -> f64 {
    let worst = (0..grid.len())
        .map(|i| {
            phase
                .eigenvalues(grid.point(i), grid.dim)
                .into_iter()
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::INFINITY, f64::min);
    if worst < 0.0 {
        1.0 / -worst
    } else {
        f64::INFINITY
    }
}

/// Phase data at time `t` on the grid, with the characteristic feet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseField {
    pub time: f64,
    pub phi: Vec<f64>,
    /// One grid per axis.
    pub grad: Vec<Vec<f64>>,
    pub laplacian: Vec<f64>,
    /// Foot `y` with `y + t∇φ_in(y) = x`.
    pub feet: Vec<[f64; 3]>,
    /// `det(I + t D²φ_in(y))`.
    pub jacobian: Vec<f64>,
}

fn invert_flow(
    phase: &InitialPhase,
    dim: usize,
    x: [f64; 3],
    t: f64,
    index: usize,
) -> Result<[f64; 3], EikonalError> {
    let xv = Vector3::from(x);
    let residual = |y: &Vector3<f64>| {
        let g = Vector3::from(phase.gradient([y[0], y[1], y[2]]));
        let mut r = y + g * t - xv;
        for a in dim..3 {
            r[a] = 0.0;
        }
        r
    };
    let tol = NEWTON_TOL * xv.norm().max(1.0);
    let g0 = Vector3::from(phase.gradient(x));
    let mut y = xv - g0 * t;
    for a in dim..3 {
        y[a] = x[a];
    }
    let mut r = residual(&y);
    let diverged = || EikonalError::NewtonDivergence {
        index,
        x: x[..dim].to_vec(),
    };
    for _ in 0..NEWTON_MAX_ITER {
        if r.norm() <= tol {
            return Ok([y[0], y[1], y[2]]);
        }
        let j = Matrix3::identity() + phase.hessian([y[0], y[1], y[2]], dim) * t;
        let step = j.lu().solve(&r).ok_or_else(diverged)?;
        let mut damp = 1.0;
        loop {
            let trial = y - step * damp;
            let rt = residual(&trial);
            if rt.norm() < r.norm() || damp < 1e-10 {
                y = trial;
                r = rt;
                break;
            }
            damp *= 0.5;
        }
    }
    if r.norm() <= tol {
        Ok([y[0], y[1], y[2]])
    } else {
        Err(diverged())
    }
}

/// Phase at time `t` by inverting `y ↦ y + t∇φ_in(y)` at each node.
pub fn solve_phase(phase: &InitialPhase, grid: &Grid, t: f64) -> Result<PhaseField, EikonalError> {
    phase.validate(grid.dim)?;
    let caustic = caustic_time(phase, grid);
    if t < 0.0 || t >= caustic {
        return Err(EikonalError::PastCaustic { t, caustic });
    }
    let dim = grid.dim;
    let n = grid.len();
    let mut out = PhaseField {
        time: t,
        phi: Vec::with_capacity(n),
        grad: vec![Vec::with_capacity(n); dim],
        laplacian: Vec::with_capacity(n),
        feet: Vec::with_capacity(n),
        jacobian: Vec::with_capacity(n),
    };
    for i in 0..n {
        let y = invert_flow(phase, dim, grid.point(i), t, i)?;
        let g = phase.gradient(y);
        let h = phase.hessian(y, dim);
        let j = Matrix3::identity() + h * t;
        let det = j.determinant();
        if !(det > 0.0) {
            return Err(EikonalError::PastCaustic { t, caustic });
        }
        let inv = j.try_inverse().ok_or(EikonalError::PastCaustic { t, caustic })?;
        out.phi.push(phase.value(y) + 0.5 * t * dot(&g, &g));
        for a in 0..dim {
            out.grad[a].push(g[a]);
        }
        out.laplacian.push((h * inv).trace());
        out.feet.push(y);
        out.jacobian.push(det);
    }
    Ok(out)
}

/// Periodic tensor-product cubic Lagrange interpolation.
pub fn interpolate_periodic(grid: &Grid, values: &[Complex64], y: [f64; 3]) -> Complex64 {
    let h = grid.dx();
    let n = grid.n as i64;
    let mut base = [0i64; 3];
    let mut w = [[0.0; 4]; 3];
    for a in 0..3 {
        if a < grid.dim {
            let s = y[a] / h;
            let f = s.floor();
            base[a] = f as i64;
            w[a] = cubic_weights(s - f);
        } else {
            w[a] = [0.0, 1.0, 0.0, 0.0];
        }
    }
    let span = |a: usize| if a < grid.dim { 0..4 } else { 1..2 };
    let mut acc = Complex64::new(0.0, 0.0);
    for i in span(0) {
        for j in span(1) {
            for k in span(2) {
                let off = [i as i64 - 1, j as i64 - 1, k as i64 - 1];
                let mut m = [0usize; 3];
                for a in 0..grid.dim {
                    m[a] = (base[a] + off[a]).rem_euclid(n) as usize;
                }
                acc += values[grid.linear_index(m)] * (w[0][i] * w[1][j] * w[2][k]);
            }
        }
    }
    acc
}

/// `∫_0^t ds / det(I + s H)` from the Hessian eigenvalues.
fn rotation_time(eigs: &[f64], t: f64) -> f64 {
    let active: Vec<f64> = eigs.iter().cloned().filter(|l| l.abs() > 1e-14).collect();
    match active.len() {
        0 => t,
        1 => {
            let l = active[0];
            (l * t).ln_1p() / l
        }
        _ => integrate_gl(
            |s| 1.0 / active.iter().map(|l| 1.0 + s * l).product::<f64>(),
            0.0,
            t,
            16,
            8,
        ),
    }
}

/// Amplitude at time `t`: `a_in(y) J^{-1/2} exp(-i c0 |a_in(y)|² ∫ ds/J)`.
pub fn solve_amplitude(
    a_in: &[Complex64],
    grid: &Grid,
    phase: &InitialPhase,
    c0: f64,
    t: f64,
) -> Result<Vec<Complex64>, EikonalError> {
    let pf = solve_phase(phase, grid, t)?;
    Ok(amplitude_from_phase(a_in, grid, phase, c0, &pf))
}

fn amplitude_from_phase(
    a_in: &[Complex64],
    grid: &Grid,
    phase: &InitialPhase,
    c0: f64,
    pf: &PhaseField,
) -> Vec<Complex64> {
    pf.feet
        .iter()
        .zip(&pf.jacobian)
        .map(|(y, j)| {
            let a0 = interpolate_periodic(grid, a_in, *y);
            let mut a = a0 / j.sqrt();
            if c0 != 0.0 {
                let s = rotation_time(&phase.eigenvalues(*y, grid.dim), pf.time);
                a *= Complex64::from_polar(1.0, -c0 * a0.norm_sqr() * s);
            }
            a
        })
        .collect()
}

/// Amplitude and phase of the limit system at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EikonalState {
    pub grid: Grid,
    pub a: Vec<Complex64>,
    pub phi_eik: Vec<f64>,
    pub grad_phi: Vec<Vec<f64>>,
    pub time: f64,
    pub c0: f64,
}

impl EikonalState {
    pub fn mass(&self) -> f64 {
        let d: Vec<f64> = self.a.iter().map(|z| z.norm_sqr()).collect();
        self.grid.integrate(&d)
    }

    /// `a exp(i φ / ε)` sampled on the grid.
    pub fn wkb_field(&self, eps: f64) -> WaveField {
        WaveField {
            grid: self.grid,
            eps,
            values: self
                .a
                .iter()
                .zip(&self.phi_eik)
                .map(|(a, p)| a * Complex64::from_polar(1.0, p / eps))
                .collect(),
        }
    }
}

pub fn solve_eikonal(
    a_in: &[Complex64],
    grid: &Grid,
    phase: &InitialPhase,
    c0: f64,
    t: f64,
) -> Result<EikonalState, EikonalError> {
    if a_in.len() != grid.len() {
        return Err(EikonalError::InvalidSetup("amplitude does not match the grid".into()));
    }
    let pf = solve_phase(phase, grid, t)?;
    let a = amplitude_from_phase(a_in, grid, phase, c0, &pf);
    Ok(EikonalState {
        grid: *grid,
        a,
        phi_eik: pf.phi,
        grad_phi: pf.grad,
        time: t,
        c0,
    })
}

/// WKB initial data `a_in exp(i φ_in / ε)`, rejecting phases that break periodicity.
pub fn wkb_initial_field(
    a_in: &[Complex64],
    grid: &Grid,
    phase: &InitialPhase,
    eps: f64,
) -> Result<WaveField, EikonalError> {
    phase.check_commensurate(grid, eps)?;
    Ok(WaveField {
        grid: *grid,
        eps,
        values: (0..grid.len())
            .map(|i| a_in[i] * Complex64::from_polar(1.0, phase.value(grid.point(i)) / eps))
            .collect(),
    })
}

/// First-order upwind solve of the amplitude transport equation with the characteristic phase.
pub fn upwind_amplitude(
    a_in: &[Complex64],
    grid: &Grid,
    phase: &InitialPhase,
    c0: f64,
    t: f64,
    steps: usize,
) -> Result<Vec<Complex64>, EikonalError> {
    if steps == 0 {
        return Err(EikonalError::InvalidSetup("at least one step is required".into()));
    }
    let dt = t / steps as f64;
    let h = grid.dx();
    let n = grid.n as i64;
    let mut a = a_in.to_vec();
    for s in 0..steps {
        let pf = solve_phase(phase, grid, s as f64 * dt)?;
        let mut next = a.clone();
        for i in 0..grid.len() {
            let m = grid.multi_index(i);
            let mut adv = Complex64::new(0.0, 0.0);
            for ax in 0..grid.dim {
                let v = pf.grad[ax][i];
                let mut nb = m;
                let shift = if v > 0.0 { -1 } else { 1 };
                nb[ax] = (m[ax] as i64 + shift).rem_euclid(n) as usize;
                let d = (a[i] - a[grid.linear_index(nb)]) / h;
                adv += d * v.abs();
            }
            let src = a[i] * (0.5 * pf.laplacian[i])
                + Complex64::new(0.0, c0 * a[i].norm_sqr()) * a[i];
            next[i] = a[i] - (adv + src) * dt;
        }
        a = next;
    }
    Ok(a)
}

/// Max over nodes away from the box edge of `|∂_tφ + ½|∇φ|²|` by centred differences.
pub fn hj_residual(phase: &InitialPhase, grid: &Grid, t: f64, dt: f64) -> Result<f64, EikonalError> {
    let before = solve_phase(phase, grid, t - dt)?;
    let now = solve_phase(phase, grid, t)?;
    let after = solve_phase(phase, grid, t + dt)?;
    let h = grid.dx();
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        let m = grid.multi_index(i);
        if (0..grid.dim).any(|a| m[a] == 0 || m[a] + 1 == grid.n) {
            continue;
        }
        let mut g2 = 0.0;
        for a in 0..grid.dim {
            let (mut lo, mut hi) = (m, m);
            lo[a] -= 1;
            hi[a] += 1;
            let d = (now.phi[grid.linear_index(hi)] - now.phi[grid.linear_index(lo)]) / (2.0 * h);
            g2 += d * d;
        }
        let dphi = (after.phi[i] - before.phi[i]) / (2.0 * dt);
        worst = worst.max((dphi + 0.5 * g2).abs());
    }
    Ok(worst)
}
