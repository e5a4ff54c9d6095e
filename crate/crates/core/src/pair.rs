//! Pair-excitation kernel `k(x, y) = -N w(s(x - y)) φ(x) φ(y)` with `w = 1 - f`.
//!
//! Norms are contracted through radial Fourier transforms of `w²`, `w` and
//! `|w'|²`, so the kernel is never stored except in the small dense mode.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{SlopeReport, SweepVariable};
use crate::eikonal::interpolate_periodic;
use crate::error::{DiagnosticsError, PairError};
use crate::gp::{radial_multiplier, sinc, WaveField};
use crate::numerics::simpson;
use crate::potential::{capacity, RadialPotential};
use crate::regime::RegimeParams;
use crate::scattering::{default_step, solve_dirichlet, solve_neumann, NeumannGroundState, ScatteringSolution};
use crate::spectral::{Grid, Spectral};

const DENSE_LIMIT: usize = 4096;
const TAIL_PANELS: usize = 4000;

/// Source of the correlation profile `f`.
#[derive(Debug, Clone, Copy)]
pub enum PairProfile<'a> {
    Neumann(&'a NeumannGroundState),
    /// Zero-energy profile truncated at `cutoff`.
    Dirichlet { sol: &'a ScatteringSolution, cutoff: f64 },
}

impl PairProfile<'_> {
    fn support(&self) -> f64 {
        match self {
            Self::Neumann(n) => n.l,
            Self::Dirichlet { cutoff, .. } => *cutoff,
        }
    }

    fn w(&self, r: f64) -> f64 {
        if r >= self.support() {
            return 0.0;
        }
        match self {
            Self::Neumann(n) => 1.0 - n.f_at(r),
            Self::Dirichlet { sol, .. } => 1.0 - sol.f_at(r),
        }
    }

    fn dw(&self, r: f64) -> f64 {
        if r >= self.support() {
            return 0.0;
        }
        match self {
            Self::Neumann(n) => -n.df_at(r),
            Self::Dirichlet { sol, .. } => -sol.df_at(r),
        }
    }

    /// Uniform segments `(step, r, w, w')` covering `[0, support]`.
    fn segments(&self) -> Vec<Segment> {
        match self {
            Self::Neumann(n) => {
                let k = n.interior_nodes;
                let seg = |range: std::ops::Range<usize>, step: f64| Segment {
                    step,
                    r: range.clone().map(|i| n.r_grid[i]).collect(),
                    w: range.clone().map(|i| 1.0 - n.f(i)).collect(),
                    dw: range.map(|i| -n.df(i)).collect(),
                };
                vec![seg(0..k + 1, n.step), seg(k..n.r_grid.len(), n.outer_step)]
            }
            Self::Dirichlet { sol, cutoff } => {
                let k = sol.interior_nodes;
                let inner = Segment {
                    step: sol.step,
                    r: sol.r_grid[..=k].to_vec(),
                    w: (0..=k).map(|i| 1.0 - sol.f(i)).collect(),
                    dw: (0..=k).map(|i| -sol.df(i)).collect(),
                };
                let mut out = vec![inner];
                if *cutoff > sol.r0 {
                    let h = (cutoff - sol.r0) / TAIL_PANELS as f64;
                    let r: Vec<f64> = (0..=TAIL_PANELS).map(|j| sol.r0 + j as f64 * h).collect();
                    out.push(Segment {
                        step: h,
                        w: r.iter().map(|x| sol.a0 / x).collect(),
                        dw: r.iter().map(|x| -sol.a0 / (x * x)).collect(),
                        r,
                    });
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Segment {
    step: f64,
    r: Vec<f64>,
    w: Vec<f64>,
    dw: Vec<f64>,
}

/// `4π ∫ r² F(r) sinc(q r) dr` over all segments.
fn radial_transform(segs: &[Segment], q: f64, pick: impl Fn(&Segment, usize) -> f64) -> f64 {
    4.0 * PI
        * segs
            .iter()
            .map(|s| {
                let g: Vec<f64> = (0..s.r.len())
                    .map(|i| s.r[i] * s.r[i] * pick(s, i) * sinc(q * s.r[i]))
                    .collect();
                simpson(&g, s.step)
            })
            .sum::<f64>()
}

/// Evaluator for the pair-excitation kernel of one condensate wave function.
#[derive(Debug, Clone)]
pub struct PairKernel<'a> {
    profile: PairProfile<'a>,
    field: WaveField,
    spectral: Spectral,
    n: f64,
    scale: f64,
    /// Fourier multipliers of `w(s·)²`, `w(s·)` and `w'(s·)²`.
    m_w2: Vec<f64>,
    m_w: Vec<f64>,
    m_dw2: Vec<f64>,
}

/// Scale-dependent bounds and the measured norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairKernelDiagnostics {
    pub hs_norm: f64,
    pub grad_hs_norm: f64,
    pub sup_slice_norm: f64,
    /// `min(μ̃ℓ^{1/2}ε⁻², μ̃ε⁻²)`.
    pub hs_bound: f64,
    /// `√N (μ̃ + λ(c₀ - a₀))^{1/2}`.
    pub grad_bound: f64,
    /// `μ̃ a₀ ℓ^{1/2} ε⁻² √(4π) ‖φ‖∞²`.
    pub sup_slice_bound: f64,
}

impl PairKernelDiagnostics {
    pub fn hs_constant(&self) -> f64 {
        self.hs_norm / self.hs_bound
    }

    pub fn grad_constant(&self) -> f64 {
        self.grad_hs_norm / self.grad_bound
    }

    pub fn sup_slice_constant(&self) -> f64 {
        self.sup_slice_norm / self.sup_slice_bound
    }
}

/// Builds the evaluator; `φ` must be three-dimensional.
pub fn build_pair_kernel<'a>(
    profile: PairProfile<'a>,
    phi: &WaveField,
    params: &RegimeParams,
) -> Result<PairKernel<'a>, PairError> {
    if phi.grid.dim != 3 {
        return Err(PairError::UnsupportedDimension(phi.grid.dim));
    }
    let grid = phi.grid;
    let s = params.scale();
    let segs = profile.segments();
    let mult = |pick: fn(&Segment, usize) -> f64| -> Result<Vec<f64>, PairError> {
        let m = radial_multiplier(&grid, s, |q| radial_transform(&segs, q, pick) / s.powi(3));
        if m.iter().all(|x| x.is_finite()) {
            Ok(m)
        } else {
            Err(PairError::QuadratureSingular)
        }
    };
    Ok(PairKernel {
        profile,
        field: phi.clone(),
        spectral: Spectral::new(grid),
        n: params.n,
        scale: s,
        m_w2: mult(|s, i| s.w[i] * s.w[i])?,
        m_w: mult(|s, i| s.w[i])?,
        m_dw2: mult(|s, i| s.dw[i] * s.dw[i])?,
    })
}

impl PairKernel<'_> {
    pub fn field(&self) -> &WaveField {
        &self.field
    }

    /// Physical support radius `L / s`.
    pub fn support(&self) -> f64 {
        self.profile.support() / self.scale
    }

    fn phi_at(&self, x: [f64; 3]) -> Complex64 {
        interpolate_periodic(&self.field.grid, &self.field.values, x)
    }

    fn separation(&self, x: [f64; 3], y: [f64; 3]) -> [f64; 3] {
        let len = self.field.grid.box_len;
        let mut d = [0.0; 3];
        for a in 0..3 {
            let r = x[a] - y[a];
            d[a] = r - len * (r / len).round();
        }
        d
    }

    /// `k(x, y)` at arbitrary points, with `φ` interpolated between nodes.
    pub fn evaluate(&self, x: [f64; 3], y: [f64; 3]) -> Complex64 {
        let d = self.separation(x, y);
        let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        -self.n * self.profile.w(self.scale * r) * self.phi_at(x) * self.phi_at(y)
    }

    /// `∇_x k(x, y)`, with the gradient of `φ` taken spectrally at the nodes and interpolated.
    pub fn gradient_x(&self, x: [f64; 3], y: [f64; 3]) -> [Complex64; 3] {
        let grad = self.spectral.gradient(&self.field.values);
        let d = self.separation(x, y);
        let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        let w = self.profile.w(self.scale * r);
        let dw = self.profile.dw(self.scale * r);
        let (px, py) = (self.phi_at(x), self.phi_at(y));
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for a in 0..3 {
            let radial = if r > 0.0 { self.scale * dw * d[a] / r } else { 0.0 };
            let gphi = interpolate_periodic(&self.field.grid, &grad[a], x);
            out[a] = -self.n * (radial * px + w * gphi) * py;
        }
        out
    }

    /// `‖k‖_HS`, `‖ε∇₁k‖_HS` and `sup_x ‖k(x,·)‖₂` by Parseval contraction.
    pub fn norms(&self) -> (f64, f64, f64) {
        let grid = self.field.grid;
        let eps = self.field.eps;
        let rho = self.field.density();
        let w2 = self.spectral.apply_real(&rho, |i| self.m_w2[i]);
        let w1 = self.spectral.apply_real(&rho, |i| self.m_w[i]);
        let dw2 = self.spectral.apply_real(&rho, |i| self.m_dw2[i]);
        let grad_w1 = self.spectral.gradient_real(&w1);
        let grad_rho = self.spectral.gradient_real(&rho);
        let grad_phi = self.spectral.gradient(&self.field.values);
        let n2 = self.n * self.n;
        let hs: Vec<f64> = (0..grid.len()).map(|i| w2[i] * rho[i]).collect();
        let hs = (n2 * grid.integrate(&hs)).max(0.0).sqrt();
        let s = self.scale;
        let g: Vec<f64> = (0..grid.len())
            .map(|i| {
                let gp2: f64 = grad_phi.iter().map(|g| g[i].norm_sqr()).sum();
                let cross: f64 = (0..3).map(|a| grad_rho[a][i] * grad_w1[a][i]).sum();
                s * s * dw2[i] * rho[i] + cross + w2[i] * gp2
            })
            .collect();
        let grad = (n2 * eps * eps * grid.integrate(&g)).max(0.0).sqrt();
        let sup = (0..grid.len())
            .map(|i| self.n * (rho[i] * w2[i].max(0.0)).sqrt())
            .fold(0.0, f64::max);
        (hs, grad, sup)
    }

    pub fn diagnostics(&self, params: &RegimeParams, a0: f64, c0: f64) -> PairKernelDiagnostics {
        let (hs_norm, grad_hs_norm, sup_slice_norm) = self.norms();
        let mt = params.mu_tilde();
        let eps2 = params.eps * params.eps;
        let ell = params.ell();
        let phi_sup = self.field.values.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        PairKernelDiagnostics {
            hs_norm,
            grad_hs_norm,
            sup_slice_norm,
            hs_bound: (mt * ell.sqrt() / eps2).min(mt / eps2),
            grad_bound: params.n.sqrt() * (mt + params.lambda() * (c0 - a0).max(0.0)).sqrt(),
            sup_slice_bound: mt * a0 * ell.sqrt() / eps2 * (4.0 * PI).sqrt() * phi_sup,
        }
    }

    /// Dense `‖k‖_HS` by direct summation over node pairs; small grids with a resolved support only.
    pub fn dense_hs_norm(&self) -> Result<f64, PairError> {
        let grid = self.field.grid;
        let cells = self.support() / grid.dx();
        if grid.len() > DENSE_LIMIT || cells < 4.0 {
            return Err(PairError::UnresolvedSupport { cells });
        }
        let mut acc = 0.0;
        for i in 0..grid.len() {
            for j in 0..grid.len() {
                let d = grid.displacement(i, j);
                let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                let k = self.n * self.profile.w(self.scale * r);
                acc += k * k * self.field.values[i].norm_sqr() * self.field.values[j].norm_sqr();
            }
        }
        Ok((acc * grid.cell_volume() * grid.cell_volume()).sqrt())
    }

    /// Largest `|k(x,y)| / (min(N, μ̃a₀/(ε²|x-y|)) |φ(x)||φ(y)|)` over the sample pairs,
    /// and whether `k` vanishes at every sampled pair beyond the support.
    pub fn pointwise_constant(
        &self,
        params: &RegimeParams,
        a0: f64,
        pairs: &[([f64; 3], [f64; 3])],
    ) -> (f64, bool) {
        let ell = self.support();
        let coef = params.mu_tilde() * a0 / (params.eps * params.eps);
        let mut worst: f64 = 0.0;
        let mut outside_zero = true;
        for (x, y) in pairs {
            let d = self.separation(*x, *y);
            let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            let k = self.evaluate(*x, *y).norm();
            if r > ell {
                outside_zero &= k == 0.0;
                continue;
            }
            let bound = if r > 0.0 { self.n.min(coef / r) } else { self.n };
            let amp = self.phi_at(*x).norm() * self.phi_at(*y).norm();
            if amp > 0.0 {
                worst = worst.max(k / (bound * amp));
            }
        }
        (worst, outside_zero)
    }

    /// `g_N = N²ε² s² (|w'(s·)|² ∗ ρ)` at the nodes.
    pub fn kinetic_density(&self) -> Vec<f64> {
        let eps = self.field.eps;
        let rho = self.field.density();
        let c = self.n * self.n * eps * eps * self.scale * self.scale;
        self.spectral
            .apply_real(&rho, |i| self.m_dw2[i])
            .into_iter()
            .map(|g| c * g)
            .collect()
    }
}

/// Profile `w = 1 - f_L` on the box `L = params.box_radius()`.
pub fn neumann_profile(v: &RadialPotential, params: &RegimeParams) -> Result<NeumannGroundState, DiagnosticsError> {
    let mu = params.mu();
    Ok(solve_neumann(v, mu, params.box_radius(), default_step(v, mu), 1e-12)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KineticCorrection {
    /// `‖(1/N) g_N ρ - 4πμ̃𝔟₀ ρ²‖_{L¹}`.
    pub residual: f64,
    /// `(1/4π) ∫|∇f_L|² - 𝔟₀`, the profile gap.
    pub gradient_gap: f64,
    pub b0: f64,
}

/// Compares the kinetic main term with `4πμ̃𝔟₀|φ|⁴`.
pub fn kinetic_correction_check(
    kernel: &PairKernel<'_>,
    params: &RegimeParams,
    scattering: &ScatteringSolution,
) -> KineticCorrection {
    let grid = kernel.field.grid;
    let g = kernel.kinetic_density();
    let rho = kernel.field.density();
    let target = 4.0 * PI * params.mu_tilde() * scattering.b0;
    let r: Vec<f64> = (0..grid.len())
        .map(|i| g[i] * rho[i] / kernel.n - target * rho[i] * rho[i])
        .collect();
    let grad_energy = match kernel.profile {
        PairProfile::Neumann(n) => n.gradient_energy(),
        PairProfile::Dirichlet { sol, cutoff } => sol.b0_by_gradient() - sol.a0 * sol.a0 / cutoff.max(sol.r0),
    };
    KineticCorrection {
        residual: grid.l1_norm(&r),
        gradient_gap: grad_energy - scattering.b0,
        b0: scattering.b0,
    }
}

/// Norm diagnostics along a parameter sweep with fitted constants and slopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSweep {
    pub params: Vec<RegimeParams>,
    pub diagnostics: Vec<PairKernelDiagnostics>,
    pub hs: SlopeReport,
    /// Slope of `‖ε∇₁k‖_HS / √N`.
    pub grad: SlopeReport,
    pub sup_slice: SlopeReport,
}

fn slope_of(values: &[f64], data: &[f64], bounds: &[f64]) -> Result<SlopeReport, DiagnosticsError> {
    let expected = crate::numerics::fit_log_log(values, bounds)
        .map(|f| f.slope)
        .unwrap_or(0.0);
    SlopeReport::fit(SweepVariable::Eps, values.to_vec(), data.to_vec(), expected)
}

/// Runs the pair diagnostics for each parameter point on a fixed `φ` (values reused, `ε` replaced).
pub fn hs_scaling_sweep(
    v: &RadialPotential,
    params_list: &[RegimeParams],
    phi: &WaveField,
) -> Result<PairSweep, DiagnosticsError> {
    let c0 = capacity(v);
    let mut diags = Vec::new();
    for p in params_list {
        let mu = p.mu();
        let sol = solve_dirichlet(v, mu, default_step(v, mu))?;
        let field = WaveField {
            eps: p.eps,
            ..phi.clone()
        };
        let l = p.box_radius();
        let d = if l >= 2.0 * v.support_radius() {
            let ngs = neumann_profile(v, p)?;
            build_pair_kernel(PairProfile::Neumann(&ngs), &field, p)
                .map_err(|e| DiagnosticsError::FitFailure(e.to_string()))?
                .diagnostics(p, sol.a0, c0)
        } else {
            build_pair_kernel(PairProfile::Dirichlet { sol: &sol, cutoff: l }, &field, p)
                .map_err(|e| DiagnosticsError::FitFailure(e.to_string()))?
                .diagnostics(p, sol.a0, c0)
        };
        diags.push(d);
    }
    let eps: Vec<f64> = params_list.iter().map(|p| p.eps).collect();
    let col = |f: fn(&PairKernelDiagnostics) -> f64| diags.iter().map(f).collect::<Vec<_>>();
    let root_n: Vec<f64> = params_list.iter().map(|p| p.n.sqrt()).collect();
    let grad: Vec<f64> = col(|d| d.grad_hs_norm).iter().zip(&root_n).map(|(g, r)| g / r).collect();
    let grad_b: Vec<f64> = col(|d| d.grad_bound).iter().zip(&root_n).map(|(g, r)| g / r).collect();
    Ok(PairSweep {
        hs: slope_of(&eps, &col(|d| d.hs_norm), &col(|d| d.hs_bound))?,
        grad: slope_of(&eps, &grad, &grad_b)?,
        sup_slice: slope_of(&eps, &col(|d| d.sup_slice_norm), &col(|d| d.sup_slice_bound))?,
        params: params_list.to_vec(),
        diagnostics: diags,
    })
}

/// Kinetic residual along GP-regime rescalings `s = N ε²` at fixed `ε`; slope in `s`.
pub fn kinetic_correction_sweep(
    v: &RadialPotential,
    eps: f64,
    scales: &[f64],
    phi: &WaveField,
) -> Result<(SlopeReport, Vec<KineticCorrection>), DiagnosticsError> {
    let mut rows = Vec::new();
    for &s in scales {
        let p = RegimeParams::new(s / (eps * eps), eps, 1.0, 1.0, 0.0)?;
        let mu = p.mu();
        let sol = solve_dirichlet(v, mu, default_step(v, mu))?;
        let ngs = neumann_profile(v, &p)?;
        let field = WaveField {
            eps,
            ..phi.clone()
        };
        let k = build_pair_kernel(PairProfile::Neumann(&ngs), &field, &p)
            .map_err(|e| DiagnosticsError::FitFailure(e.to_string()))?;
        rows.push(kinetic_correction_check(&k, &p, &sol));
    }
    let report = SlopeReport::fit(
        SweepVariable::NScale,
        scales.to_vec(),
        rows.iter().map(|r| r.residual).collect(),
        -1.0,
    )?;
    Ok((report, rows))
}

/// Grid of sample pairs: each node of a coarse lattice paired with points at the given offsets.
pub fn sample_pairs(grid: &Grid, stride: usize, offsets: &[[f64; 3]]) -> Vec<([f64; 3], [f64; 3])> {
    let mut out = Vec::new();
    for i in (0..grid.len()).step_by(stride.max(1)) {
        let x = grid.point(i);
        for o in offsets {
            out.push((x, [x[0] + o[0], x[1] + o[1], x[2] + o[2]]));
        }
    }
    out
}
