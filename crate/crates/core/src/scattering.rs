//! Zero-energy scattering and the Neumann ground state for radial potentials.
//!
//! Radial solutions are carried as `m(r) = r f(r)`, which turns
//! `(-mu Δ + v - E) f = 0` into `-mu m'' + (v - E) m = 0` with `m(0) = 0`.

use serde::{Deserialize, Serialize};

use crate::error::ScatteringError;
use crate::numerics::{fit_log_log, simpson, LineFit};
use crate::potential::{capacity, RadialPotential};
use crate::regime::RegimeParams;

const RESCALE_THRESHOLD: f64 = 1e150;

/// Dirichlet (zero-energy) scattering solution on `[0, r_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringSolution {
    pub mu: f64,
    pub step: f64,
    pub r0: f64,
    /// Uniform radii from 0 to `r_max`; node `interior_nodes` sits on `R0`.
    pub r_grid: Vec<f64>,
    pub m_values: Vec<f64>,
    /// `m'(r)`, normalized so that `m'(R0) = 1`.
    pub dm_values: Vec<f64>,
    pub interior_nodes: usize,
    pub a0: f64,
    /// `f(0+)`, the minimum of the monotone profile.
    pub c1: f64,
    pub b0: f64,
}

impl ScatteringSolution {
    pub fn f(&self, i: usize) -> f64 {
        if i == 0 {
            self.c1
        } else {
            self.m_values[i] / self.r_grid[i]
        }
    }

    pub fn df(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            let r = self.r_grid[i];
            (r * self.dm_values[i] - self.m_values[i]) / (r * r)
        }
    }

    /// `f` at an arbitrary radius: interpolated inside, closed form outside.
    pub fn f_at(&self, r: f64) -> f64 {
        if r >= self.r0 {
            return 1.0 - self.a0 / r;
        }
        interp_profile(&self.m_values, &self.dm_values, self.step, self.c1, r)
    }

    /// `f'` at an arbitrary radius.
    pub fn df_at(&self, r: f64) -> f64 {
        if r >= self.r0 {
            return self.a0 / (r * r);
        }
        let (m, dm) = hermite(&self.m_values, &self.dm_values, self.step, r);
        if r <= 0.0 {
            0.0
        } else {
            (r * dm - m) / (r * r)
        }
    }

    pub fn interior_m(&self) -> &[f64] {
        &self.m_values[..=self.interior_nodes]
    }

    pub fn interior_dm(&self) -> &[f64] {
        &self.dm_values[..=self.interior_nodes]
    }

    /// Second expression of the kinetic fraction, `(1/4π) ∫ |∇f|² dx`.
    pub fn b0_by_gradient(&self) -> f64 {
        let g: Vec<f64> = (0..=self.interior_nodes)
            .map(|i| {
                let r = self.r_grid[i];
                if i == 0 {
                    0.0
                } else {
                    let q = r * self.dm_values[i] - self.m_values[i];
                    q * q / (r * r)
                }
            })
            .collect();
        simpson(&g, self.step) + self.a0 * self.a0 / self.r0
    }
}

/// Neumann ground state on the ball of radius `l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeumannGroundState {
    pub mu: f64,
    pub l: f64,
    pub r0: f64,
    pub energy: f64,
    /// Step inside the support.
    pub step: f64,
    /// Step of the uniform grid covering `[R0, L]`.
    pub outer_step: f64,
    pub interior_nodes: usize,
    pub r_grid: Vec<f64>,
    pub m_values: Vec<f64>,
    pub dm_values: Vec<f64>,
}

impl NeumannGroundState {
    pub fn f(&self, i: usize) -> f64 {
        if i == 0 {
            self.dm_values[0]
        } else {
            self.m_values[i] / self.r_grid[i]
        }
    }

    pub fn df(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            let r = self.r_grid[i];
            (r * self.dm_values[i] - self.m_values[i]) / (r * r)
        }
    }

    pub fn interior_m(&self) -> &[f64] {
        &self.m_values[..=self.interior_nodes]
    }

    /// `f_L` at an arbitrary radius, equal to 1 beyond the box.
    pub fn f_at(&self, r: f64) -> f64 {
        if r >= self.l {
            return 1.0;
        }
        if r <= self.r0 {
            return interp_profile(
                &self.m_values[..=self.interior_nodes],
                &self.dm_values[..=self.interior_nodes],
                self.step,
                self.dm_values[0],
                r,
            );
        }
        let (m, _) = self.outer_eval(r);
        m / r
    }

    /// `f_L'` at an arbitrary radius, zero beyond the box.
    pub fn df_at(&self, r: f64) -> f64 {
        if r >= self.l || r <= 0.0 {
            return 0.0;
        }
        let (m, dm) = if r <= self.r0 {
            hermite(
                &self.m_values[..=self.interior_nodes],
                &self.dm_values[..=self.interior_nodes],
                self.step,
                r,
            )
        } else {
            self.outer_eval(r)
        };
        (r * dm - m) / (r * r)
    }

    fn outer_eval(&self, r: f64) -> (f64, f64) {
        let a = self.m_values[self.interior_nodes];
        let b = self.dm_values[self.interior_nodes];
        free_propagate(a, b, self.energy / self.mu, r - self.r0)
    }

    /// `(1/4π) ∫_{|x|≤L} |∇f_L|² dx`.
    pub fn gradient_energy(&self) -> f64 {
        let q = |i: usize| {
            if i == 0 {
                0.0
            } else {
                let r = self.r_grid[i];
                let d = r * self.dm_values[i] - self.m_values[i];
                d * d / (r * r)
            }
        };
        let inner: Vec<f64> = (0..=self.interior_nodes).map(q).collect();
        let outer: Vec<f64> = (self.interior_nodes..self.r_grid.len()).map(q).collect();
        simpson(&inner, self.step) + simpson(&outer, self.outer_step)
    }
}

/// Default step: comfortably inside the boundary-layer rule.
pub fn default_step(v: &RadialPotential, mu: f64) -> f64 {
    let r0 = v.support_radius();
    let mut h = r0 / 2000.0;
    if v.v_max() > 0.0 {
        h = h.min(0.01 * (mu / v.v_max()).sqrt());
    }
    snap_step(r0, h)
}

fn snap_step(r0: f64, h: f64) -> f64 {
    r0 / (r0 / h).ceil()
}

fn check_step(v: &RadialPotential, mu: f64, step: f64) -> Result<(), ScatteringError> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(ScatteringError::NonPositiveMu(mu));
    }
    let r0 = v.support_radius();
    let mut limit = r0 / 200.0;
    if v.v_max() > 0.0 {
        limit = limit.min(0.1 * (mu / v.v_max()).sqrt());
    }
    if !(step > 0.0) || step > limit * (1.0 + 1e-9) {
        return Err(ScatteringError::StepTooCoarse { step, limit });
    }
    Ok(())
}

struct Shot {
    m: Vec<f64>,
    dm: Vec<f64>,
    /// `ln` of the factor that restores the unscaled value at the last node.
    log_scale: f64,
}

/// RK4 for `m'' = (v(r) - e) m / mu` on `[0, R0]` from `m(0)=0, m'(0)=1`,
/// renormalizing to stay in range. Returned values share the scale of the last node.
fn shoot_interior(v: &RadialPotential, mu: f64, energy: f64, nodes: usize) -> Shot {
    let r0 = v.support_radius();
    let h = r0 / nodes as f64;
    let q = |r: f64| (v.profile(r) - energy) / mu;
    let mut m = vec![0.0; nodes + 1];
    let mut dm = vec![0.0; nodes + 1];
    let mut logs = vec![0.0; nodes + 1];
    let (mut y, mut z, mut s) = (0.0f64, 1.0f64, 0.0f64);
    dm[0] = 1.0;
    for i in 0..nodes {
        let r = i as f64 * h;
        let qa = q(r);
        let qm = q(r + 0.5 * h);
        let qb = q(r + h);
        let k1y = z;
        let k1z = qa * y;
        let k2y = z + 0.5 * h * k1z;
        let k2z = qm * (y + 0.5 * h * k1y);
        let k3y = z + 0.5 * h * k2z;
        let k3z = qm * (y + 0.5 * h * k2y);
        let k4y = z + h * k3z;
        let k4z = qb * (y + h * k3y);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
        let size = y.abs().max(z.abs());
        if size > RESCALE_THRESHOLD {
            y /= size;
            z /= size;
            s += size.ln();
        }
        m[i + 1] = y;
        dm[i + 1] = z;
        logs[i + 1] = s;
    }
    let last = logs[nodes];
    for i in 0..=nodes {
        let f = (logs[i] - last).exp();
        m[i] *= f;
        dm[i] *= f;
    }
    Shot {
        m,
        dm,
        log_scale: last,
    }
}

/// Exact solution of `-mu m'' = E m` from `(m, m')` over a distance `d`.
fn free_propagate(m: f64, dm: f64, k2: f64, d: f64) -> (f64, f64) {
    if k2 <= 0.0 {
        return (m + dm * d, dm);
    }
    let k = k2.sqrt();
    let (s, c) = (k * d).sin_cos();
    (m * c + dm * s / k, -m * k * s + dm * c)
}

fn hermite(m: &[f64], dm: &[f64], h: f64, r: f64) -> (f64, f64) {
    let last = m.len() - 1;
    let s = (r / h).clamp(0.0, last as f64);
    let i = (s.floor() as usize).min(last.saturating_sub(1));
    let t = s - i as f64;
    let (p0, p1, d0, d1) = (m[i], m[i + 1], dm[i] * h, dm[i + 1] * h);
    let t2 = t * t;
    let t3 = t2 * t;
    let val = (2.0 * t3 - 3.0 * t2 + 1.0) * p0
        + (t3 - 2.0 * t2 + t) * d0
        + (-2.0 * t3 + 3.0 * t2) * p1
        + (t3 - t2) * d1;
    let der = ((6.0 * t2 - 6.0 * t) * p0
        + (3.0 * t2 - 4.0 * t + 1.0) * d0
        + (-6.0 * t2 + 6.0 * t) * p1
        + (3.0 * t2 - 2.0 * t) * d1)
        / h;
    (val, der)
}

fn interp_profile(m: &[f64], dm: &[f64], h: f64, f0: f64, r: f64) -> f64 {
    if r <= 0.0 {
        return f0;
    }
    hermite(m, dm, h, r).0 / r
}

/// Solves the zero-energy scattering problem with the tail appended up to `2 R0`.
pub fn solve_dirichlet(
    v: &RadialPotential,
    mu: f64,
    step: f64,
) -> Result<ScatteringSolution, ScatteringError> {
    solve_dirichlet_to(v, mu, step, 2.0 * v.support_radius())
}

/// Solves the zero-energy scattering problem with the linear tail up to `r_max`.
pub fn solve_dirichlet_to(
    v: &RadialPotential,
    mu: f64,
    step: f64,
    r_max: f64,
) -> Result<ScatteringSolution, ScatteringError> {
    check_step(v, mu, step)?;
    let r0 = v.support_radius();
    let nodes = (r0 / step).ceil() as usize;
    let h = r0 / nodes as f64;
    let shot = shoot_interior(v, mu, 0.0, nodes);
    let m_end = shot.m[nodes];
    let dm_end = shot.dm[nodes];
    if !m_end.is_finite() || !dm_end.is_finite() || dm_end <= 0.0 {
        return Err(ScatteringError::StepTooCoarse { step, limit: h });
    }
    let a0 = if v.is_zero() { 0.0 } else { r0 - m_end / dm_end };
    let scale = 1.0 / dm_end;
    let c1 = if v.is_zero() { 1.0 } else { (-shot.log_scale).exp() * scale };
    let tail = ((r_max.max(r0) - r0) / h).round() as usize;
    let total = nodes + tail;
    let mut r_grid = Vec::with_capacity(total + 1);
    let mut m_values = Vec::with_capacity(total + 1);
    let mut dm_values = Vec::with_capacity(total + 1);
    for i in 0..=nodes {
        let r = i as f64 * h;
        r_grid.push(r);
        if v.is_zero() {
            m_values.push(r);
            dm_values.push(1.0);
        } else {
            m_values.push(shot.m[i] * scale);
            dm_values.push(shot.dm[i] * scale);
        }
    }
    for j in 1..=tail {
        let r = r0 + j as f64 * h;
        r_grid.push(r);
        m_values.push(r - a0);
        dm_values.push(1.0);
    }
    if a0 < -1e-12 || a0 > r0 * (1.0 + 1e-12) {
        return Err(ScatteringError::StepTooCoarse { step, limit: h });
    }
    let mut sol = ScatteringSolution {
        mu,
        step: h,
        r0,
        r_grid,
        m_values,
        dm_values,
        interior_nodes: nodes,
        a0,
        c1,
        b0: 0.0,
    };
    sol.b0 = b0_kinetic_fraction(&sol, v)?;
    Ok(sol)
}

fn check_grid(sol_r0: f64, sol_nodes: usize, sol_step: f64, v: &RadialPotential) -> Result<(), ScatteringError> {
    let r0 = v.support_radius();
    if (sol_r0 - r0).abs() > 1e-12 * r0 || ((sol_nodes as f64) * sol_step - r0).abs() > 1e-9 * r0 {
        return Err(ScatteringError::GridMismatch);
    }
    Ok(())
}

/// `∫_0^{R0} v(r) g(r) dr` for samples `g` on the uniform interior grid.
///
/// Panels next to the support boundary integrate the factor `(1 - r/R0)^n`
/// exactly against the quadratic interpolant of `g`, so non-smooth vanishing
/// profiles keep second-order accuracy.
pub(crate) fn weighted_integral(v: &RadialPotential, h: f64, g: &[f64]) -> f64 {
    let nodes = g.len().saturating_sub(1);
    if nodes == 0 || v.is_zero() {
        return 0.0;
    }
    let n = v.vanishing_order();
    if n == 0.0 {
        let vals: Vec<f64> = g.iter().map(|x| v.v_max() * x).collect();
        return simpson(&vals, h);
    }
    let panels = (nodes / 2).min(64);
    let head = nodes - 2 * panels;
    let vals: Vec<f64> = (0..=head).map(|i| v.profile(i as f64 * h) * g[i]).collect();
    let mut acc = simpson(&vals, h);
    let r0 = v.support_radius();
    let d = h / r0;
    for p in 0..panels {
        let a = head + 2 * p;
        let c = 1.0 - a as f64 * d;
        let m = jacobi_moments(c, d, n);
        // Lagrange basis on t = 0, 1, 2.
        let w0 = 0.5 * (m[2] - 3.0 * m[1] + 2.0 * m[0]);
        let w1 = -(m[2] - 2.0 * m[1]);
        let w2 = 0.5 * (m[2] - m[1]);
        acc += h * v.v_max() * (w0 * g[a] + w1 * g[a + 1] + w2 * g[a + 2]);
    }
    acc
}

/// `∫_0^2 (c - d t)^n t^k dt` for `k = 0, 1, 2`.
fn jacobi_moments(c: f64, d: f64, n: f64) -> [f64; 3] {
    let lo = (c - 2.0 * d).max(0.0);
    let prim = |p: f64| (c.powf(p) - lo.powf(p)) / p;
    let i0 = prim(n + 1.0);
    let i1 = prim(n + 2.0);
    let i2 = prim(n + 3.0);
    // t = (c - u)/d with u = c - d t.
    [
        i0 / d,
        (c * i0 - i1) / (d * d),
        (c * c * i0 - 2.0 * c * i1 + i2) / (d * d * d),
    ]
}

/// `(1/mu) ∫_0^{R0} v m r dr`, the integral expression of the scattering length.
pub fn scattering_length_by_integral(
    sol: &ScatteringSolution,
    v: &RadialPotential,
) -> Result<f64, ScatteringError> {
    check_grid(sol.r0, sol.interior_nodes, sol.step, v)?;
    let g: Vec<f64> = sol
        .interior_m()
        .iter()
        .enumerate()
        .map(|(i, m)| m * i as f64 * sol.step)
        .collect();
    Ok(weighted_integral(v, sol.step, &g) / sol.mu)
}

/// `a0 - (1/mu) ∫_0^{R0} v m² dr`.
pub fn b0_kinetic_fraction(
    sol: &ScatteringSolution,
    v: &RadialPotential,
) -> Result<f64, ScatteringError> {
    check_grid(sol.r0, sol.interior_nodes, sol.step, v)?;
    let g: Vec<f64> = sol.interior_m().iter().map(|m| m * m).collect();
    let b0 = sol.a0 - weighted_integral(v, sol.step, &g) / sol.mu;
    let tol = 1e-9 * sol.a0.max(1e-300);
    if b0 < -tol {
        return Err(ScatteringError::NegativeResult(b0));
    }
    Ok(b0.max(0.0))
}

/// Neumann ground state with `E` located to relative tolerance `e_tol`.
pub fn solve_neumann(
    v: &RadialPotential,
    mu: f64,
    l: f64,
    step: f64,
    e_tol: f64,
) -> Result<NeumannGroundState, ScatteringError> {
    check_step(v, mu, step)?;
    let r0 = v.support_radius();
    if !(l >= 2.0 * r0 * (1.0 - 1e-12)) {
        return Err(ScatteringError::BoxTooSmall { l, r0 });
    }
    solve_neumann_unchecked(v, mu, l, step, e_tol)
}

/// Neumann solve allowing `R0 < L < 2 R0`; used only by diagnostics that scan small boxes.
pub(crate) fn solve_neumann_unchecked(
    v: &RadialPotential,
    mu: f64,
    l: f64,
    step: f64,
    e_tol: f64,
) -> Result<NeumannGroundState, ScatteringError> {
    let r0 = v.support_radius();
    let nodes = (r0 / step).ceil() as usize;
    let h = r0 / nodes as f64;
    let outer = (((l - r0) / h).ceil() as usize).max(2);
    let outer_step = (l - r0) / outer as f64;

    let energy = if v.is_zero() {
        0.0
    } else {
        let base = shoot_interior(v, mu, 0.0, nodes);
        let a0 = r0 - base.m[nodes] / base.dm[nodes];
        let residual = |e: f64| -> f64 {
            let shot = shoot_interior(v, mu, e, nodes);
            let (a, b) = (shot.m[nodes], shot.dm[nodes]);
            let (ml, dml) = free_propagate(a, b, e / mu, l - r0);
            (l * dml - ml) / (a.abs() + b.abs() * l)
        };
        let mut upper = 5.0 * 3.0 * mu * a0 / l.powi(3);
        let mut bracket = None;
        for _ in 0..4 {
            bracket = first_sign_change(&residual, upper, 32);
            if bracket.is_some() {
                break;
            }
            upper *= 10.0;
        }
        let (mut lo, mut hi) = bracket.ok_or(ScatteringError::BracketFailure { upper })?;
        let mut flo = residual(lo);
        for _ in 0..200 {
            if hi - lo <= e_tol * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let fm = residual(mid);
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if (fm > 0.0) == (flo > 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };

    let shot = shoot_interior(v, mu, energy, nodes);
    let (a, b) = (shot.m[nodes], shot.dm[nodes]);
    let k2 = energy / mu;
    let mut r_grid = Vec::with_capacity(nodes + outer + 1);
    let mut m_values = Vec::with_capacity(nodes + outer + 1);
    let mut dm_values = Vec::with_capacity(nodes + outer + 1);
    for i in 0..=nodes {
        r_grid.push(i as f64 * h);
        m_values.push(shot.m[i]);
        dm_values.push(shot.dm[i]);
    }
    for j in 1..=outer {
        let d = j as f64 * outer_step;
        let (m, dm) = free_propagate(a, b, k2, d);
        r_grid.push(r0 + d);
        m_values.push(m);
        dm_values.push(dm);
    }
    let scale = l / m_values[nodes + outer];
    for (m, dm) in m_values.iter_mut().zip(dm_values.iter_mut()) {
        *m *= scale;
        *dm *= scale;
    }
    if let Some(i) = (1..m_values.len()).find(|&i| !(m_values[i] > 0.0)) {
        return Err(ScatteringError::NodeDetected { r: r_grid[i] });
    }
    Ok(NeumannGroundState {
        mu,
        l,
        r0,
        energy,
        step: h,
        outer_step,
        interior_nodes: nodes,
        r_grid,
        m_values,
        dm_values,
    })
}

fn first_sign_change<F: Fn(f64) -> f64>(f: &F, upper: f64, pieces: usize) -> Option<(f64, f64)> {
    let mut lo = 0.0;
    let mut flo = f(lo);
    for k in 1..=pieces {
        let hi = upper * k as f64 / pieces as f64;
        let fhi = f(hi);
        if (fhi > 0.0) != (flo > 0.0) || fhi == 0.0 {
            return Some((lo, hi));
        }
        lo = hi;
        flo = fhi;
    }
    None
}

/// `∫ v f_L^p dx = 4π ∫_0^{R0} v m^p r^{2-p} dr` for `p ∈ {1, 2}`.
pub fn potential_moment(ngs: &NeumannGroundState, v: &RadialPotential, power: u32) -> f64 {
    let p = power as i32;
    let g: Vec<f64> = ngs
        .interior_m()
        .iter()
        .enumerate()
        .map(|(i, m)| m.powi(p) * (i as f64 * ngs.step).powi(2 - p))
        .collect();
    4.0 * std::f64::consts::PI * weighted_integral(v, ngs.step, &g)
}

/// Result of fitting `η(mu) = c0 - a0^mu` against `mu` on log axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest relative deviation of `η` from the fitted power law.
    pub residual: f64,
    pub mu: Vec<f64>,
    pub eta: Vec<f64>,
    /// Which points entered the fit.
    pub used: Vec<bool>,
}

impl RateFit {
    pub fn expected_slope(n: f64) -> f64 {
        1.0 / (n + 2.0)
    }
}

/// `c0 - a0^mu` for the given potential, solved at the default step.
pub fn eta(v: &RadialPotential, mu: f64) -> Result<f64, ScatteringError> {
    let sol = solve_dirichlet(v, mu, default_step(v, mu))?;
    Ok(capacity(v) - sol.a0)
}

/// Fits the decay rate of `c0 - a0^mu` as `mu -> 0` for the family member of order `n`.
pub fn eta_rate_fit<F>(v_family: F, n: f64, mu_list: &[f64]) -> Result<RateFit, ScatteringError>
where
    F: Fn(f64) -> RadialPotential,
{
    let v = v_family(n);
    let c0 = capacity(&v);
    let mut etas = Vec::with_capacity(mu_list.len());
    for &mu in mu_list {
        etas.push(eta(&v, mu)?);
    }
    for w in 0..mu_list.len().saturating_sub(1) {
        if !(etas[w + 1] < etas[w]) {
            return Err(ScatteringError::NonMonotoneEta { mu: mu_list[w + 1] });
        }
    }
    let used: Vec<bool> = etas.iter().map(|e| *e <= 0.3 * c0 && *e > 0.0).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = mu_list
        .iter()
        .zip(&etas)
        .zip(&used)
        .filter(|(_, u)| **u)
        .map(|((m, e), _)| (*m, *e))
        .unzip();
    if xs.len() < 2 {
        return Err(ScatteringError::InsufficientPoints(xs.len()));
    }
    let LineFit {
        slope, intercept, ..
    } = fit_log_log(&xs, &ys).ok_or(ScatteringError::InsufficientPoints(xs.len()))?;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| ((intercept + slope * x.ln()).exp() / y - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(RateFit {
        slope,
        intercept,
        residual,
        mu: mu_list.to_vec(),
        eta: etas,
        used,
    })
}

/// Scattering data of the rescaled potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaledScattering {
    /// Scattering length of the rescaled potential.
    pub a_n: f64,
    /// `N a_N ε²`, computed as `μ̃ a0`.
    pub coupling: f64,
    /// Limit value `μ̃ c0`.
    pub target: f64,
    /// `|N a_N ε² - μ̃ c0| / μ̃`.
    pub deviation: f64,
}

pub fn rescaled_scattering_data(
    params: &RegimeParams,
    base: &ScatteringSolution,
) -> Result<RescaledScattering, ScatteringError> {
    let mu = params.mu();
    if (base.mu - mu).abs() > 1e-12 * mu {
        return Err(ScatteringError::GridMismatch);
    }
    let mu_t = params.mu_tilde();
    let coupling = mu_t * base.a0;
    let target = mu_t * base.r0;
    Ok(RescaledScattering {
        a_n: base.a0 / params.scale(),
        coupling,
        target,
        deviation: (coupling - target).abs() / mu_t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn box_a0(v0: f64, r0: f64, mu: f64) -> f64 {
        let k = (v0 / mu).sqrt();
        r0 - (k * r0).tanh() / k
    }

    #[test]
    fn free_potential_has_zero_length() {
        let v = RadialPotential::zero();
        let sol = solve_dirichlet(&v, 1.0, default_step(&v, 1.0)).unwrap();
        assert_eq!(sol.a0, 0.0);
        assert_eq!(sol.b0, 0.0);
        for (r, m) in sol.r_grid.iter().zip(&sol.m_values) {
            assert_relative_eq!(*m, *r, epsilon = 1e-14);
        }
    }

    #[test]
    fn square_well_matches_closed_form() {
        let v = RadialPotential::constant(1.0, 1.0).unwrap();
        for mu in [1.0, 1e-2, 1e-4] {
            let sol = solve_dirichlet(&v, mu, default_step(&v, mu)).unwrap();
            assert!((sol.a0 - box_a0(1.0, 1.0, mu)).abs() < 1e-9, "mu = {mu}");
        }
    }

    #[test]
    fn deep_semiclassical_limit_stays_finite() {
        let v = RadialPotential::constant(1.0, 1.0).unwrap();
        let mu = 1e-10;
        let sol = solve_dirichlet(&v, mu, default_step(&v, mu)).unwrap();
        assert!((sol.a0 - box_a0(1.0, 1.0, mu)).abs() < 1e-9);
        assert!(sol.c1 >= 0.0 && sol.c1.is_finite());
    }

    #[test]
    fn coarse_step_is_rejected() {
        let v = RadialPotential::constant(1.0, 1.0).unwrap();
        assert!(matches!(
            solve_dirichlet(&v, 1e-4, 0.01),
            Err(ScatteringError::StepTooCoarse { .. })
        ));
        assert!(matches!(
            solve_dirichlet(&v, 0.0, 0.001),
            Err(ScatteringError::NonPositiveMu(_))
        ));
    }

    #[test]
    fn mismatched_grid_is_rejected() {
        let v = RadialPotential::constant(1.0, 1.0).unwrap();
        let w = RadialPotential::constant(1.0, 2.0).unwrap();
        let sol = solve_dirichlet(&v, 1.0, default_step(&v, 1.0)).unwrap();
        assert_eq!(
            scattering_length_by_integral(&sol, &w),
            Err(ScatteringError::GridMismatch)
        );
    }

    #[test]
    fn free_neumann_state_is_flat() {
        let v = RadialPotential::zero();
        let ngs = solve_neumann(&v, 1.0, 10.0, 0.001, 1e-10).unwrap();
        assert_eq!(ngs.energy, 0.0);
        for i in 1..ngs.r_grid.len() {
            assert_relative_eq!(ngs.f(i), 1.0, epsilon = 1e-12);
        }
        assert_eq!(potential_moment(&ngs, &v, 1), 0.0);
    }

    #[test]
    fn neumann_boundary_conditions_hold() {
        let v = RadialPotential::constant(1.0, 1.0).unwrap();
        let ngs = solve_neumann(&v, 1.0, 10.0, default_step(&v, 1.0), 1e-12).unwrap();
        let last = ngs.r_grid.len() - 1;
        assert_relative_eq!(ngs.m_values[last], 10.0, max_relative = 1e-12);
        assert!((ngs.dm_values[last] - 1.0).abs() < 1e-8);
        assert!(matches!(
            solve_neumann(&v, 1.0, 1.5, 0.001, 1e-10),
            Err(ScatteringError::BoxTooSmall { .. })
        ));
    }

    #[test]
    fn rescaled_data_in_gross_pitaevskii_regime() {
        let v = RadialPotential::constant(1.0, 1.0).unwrap();
        let p = RegimeParams::new(64.0, 0.5, 1.0, 1.0, 0.0).unwrap();
        let sol = solve_dirichlet(&v, p.mu(), default_step(&v, p.mu())).unwrap();
        let d = rescaled_scattering_data(&p, &sol).unwrap();
        assert_eq!(d.coupling, sol.a0);
        assert_relative_eq!(d.a_n, sol.a0 / 16.0, max_relative = 1e-14);
        assert_relative_eq!(d.deviation, 1.0 - sol.a0, max_relative = 1e-12);
    }
}
