use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::GpError;
use crate::numerics::simpson;
use crate::potential::RadialPotential;
use crate::regime::{Regime, RegimeParams};
use crate::scattering::{weighted_integral, NeumannGroundState, ScatteringSolution};
use crate::spectral::{Grid, Spectral};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelMode {
    /// Rescaled potential times correlation profile, applied as a Fourier multiplier.
    Scaled,
    /// Point interaction `g δ`.
    Delta,
}

/// Correlation profile entering the kernel.
#[derive(Debug, Clone, Copy)]
pub enum CorrelationProfile<'a> {
    Dirichlet(&'a ScatteringSolution),
    Neumann(&'a NeumannGroundState),
}

impl CorrelationProfile<'_> {
    fn mu(&self) -> f64 {
        match self {
            Self::Dirichlet(s) => s.mu,
            Self::Neumann(s) => s.mu,
        }
    }

    fn step(&self) -> f64 {
        match self {
            Self::Dirichlet(s) => s.step,
            Self::Neumann(s) => s.step,
        }
    }

    fn interior_m(&self) -> &[f64] {
        match self {
            Self::Dirichlet(s) => s.interior_m(),
            Self::Neumann(s) => s.interior_m(),
        }
    }

    fn f(&self, i: usize) -> f64 {
        match self {
            Self::Dirichlet(s) => s.f(i),
            Self::Neumann(s) => s.f(i),
        }
    }
}

/// Convolution kernel of the modified Gross-Pitaevskii equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveKernel {
    pub mode: KernelMode,
    /// Point coupling in delta mode, `∫K` in scaled mode.
    pub g: f64,
    /// `K̂` in FFT order (scaled mode only).
    pub multiplier: Option<Vec<f64>>,
    /// `λ (v f)` on the two-body interior grid (scaled mode only).
    radial: Option<RadialTable>,
    /// `4π μ̃ a0` when the Dirichlet length is known.
    pub expected_integral: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RadialTable {
    step: f64,
    values: Vec<f64>,
    scale: f64,
    support: f64,
}

impl EffectiveKernel {
    pub fn zero() -> Self {
        Self::delta(0.0)
    }

    pub fn delta(g: f64) -> Self {
        Self {
            mode: KernelMode::Delta,
            g,
            multiplier: None,
            radial: None,
            expected_integral: Some(g),
        }
    }

    /// Point coupling `4π μ̃ a0^μ`.
    pub fn delta_for(params: &RegimeParams, sol: &ScatteringSolution) -> Result<Self, GpError> {
        check_mu(params, sol.mu)?;
        Ok(Self::delta(4.0 * PI * params.mu_tilde() * sol.a0))
    }

    pub fn is_zero(&self) -> bool {
        self.g == 0.0
    }

    /// `∫ K dx`.
    pub fn integral(&self) -> f64 {
        self.g
    }

    /// `K ∗ ρ` on the kernel's grid.
    pub fn convolve(&self, spectral: &Spectral, rho: &[f64]) -> Vec<f64> {
        match &self.multiplier {
            None => rho.iter().map(|r| self.g * r).collect(),
            Some(m) => spectral.apply_real(rho, |i| m[i]),
        }
    }

    /// Pointwise kernel in physical space at each node (minimum-image distance to the origin).
    pub fn tabulate(&self, grid: &Grid) -> Option<Vec<f64>> {
        let t = self.radial.as_ref()?;
        let origin = 0;
        Some(
            (0..grid.len())
                .map(|i| {
                    let d = grid.displacement(i, origin);
                    let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt() * t.scale;
                    if r >= t.support {
                        0.0
                    } else {
                        t.scale.powi(3) * crate::numerics::lerp_uniform(&t.values, t.step, r)
                    }
                })
                .collect(),
        )
    }

    /// Riemann sum of the tabulated physical kernel.
    pub fn grid_integral(&self, grid: &Grid) -> f64 {
        match self.tabulate(grid) {
            Some(k) => grid.integrate(&k),
            None => self.g,
        }
    }
}

fn check_mu(params: &RegimeParams, mu: f64) -> Result<(), GpError> {
    let target = params.mu();
    if (mu - target).abs() > 1e-9 * target {
        return Err(GpError::InvalidSetup(format!(
            "profile solved at mu = {mu}, regime requires {target}"
        )));
    }
    Ok(())
}

/// Builds the kernel for `params` in the requested mode.
///
/// Delta mode needs a Dirichlet profile for the scattering length. Scaled
/// mode uses the Dirichlet profile in the dilute regime and the Neumann
/// profile on the box `L = params.box_radius()` otherwise; when that box is
/// smaller than `2 R0` the Dirichlet profile stands in for it.
pub fn build_effective_kernel(
    params: &RegimeParams,
    v: &RadialPotential,
    profile: CorrelationProfile<'_>,
    grid: &Grid,
    mode: KernelMode,
) -> Result<EffectiveKernel, GpError> {
    params.validate()?;
    check_mu(params, profile.mu())?;
    let r0 = v.support_radius();
    let l = params.box_radius();
    match (params.regime(), profile) {
        (Regime::HD, CorrelationProfile::Neumann(_)) => {
            return Err(GpError::InvalidSetup(
                "dilute regime requires the Dirichlet profile".into(),
            ))
        }
        (Regime::HD, _) => {}
        (_, CorrelationProfile::Neumann(n)) => {
            if (n.l - l).abs() > 1e-9 * l {
                return Err(GpError::InvalidSetup(format!(
                    "Neumann box {} differs from required {l}",
                    n.l
                )));
            }
        }
        (_, CorrelationProfile::Dirichlet(_)) => {
            if l >= 2.0 * r0 {
                return Err(GpError::InvalidSetup(
                    "this regime requires the Neumann profile".into(),
                ));
            }
        }
    }

    if mode == KernelMode::Delta {
        return match profile {
            CorrelationProfile::Dirichlet(s) => EffectiveKernel::delta_for(params, s),
            CorrelationProfile::Neumann(_) => Err(GpError::InvalidSetup(
                "delta mode needs the Dirichlet scattering length".into(),
            )),
        };
    }

    if grid.dim != 3 {
        return Err(GpError::InvalidSetup(
            "scaled kernel is defined in three dimensions".into(),
        ));
    }
    let s = params.scale();
    let lambda = params.lambda();
    let support = r0 / s;
    let cells = support / grid.dx();
    if cells < 4.0 {
        return Err(GpError::UnresolvedKernel { cells });
    }
    if support > 0.5 * grid.box_len {
        return Err(GpError::InvalidSetup(
            "kernel support exceeds half the box".into(),
        ));
    }

    let h = profile.step();
    let m = profile.interior_m();
    let radii: Vec<f64> = (0..m.len()).map(|i| i as f64 * h).collect();
    let multiplier = radial_multiplier(grid, s, |q| {
        let g: Vec<f64> = radii
            .iter()
            .zip(m)
            .map(|(r, mv)| mv * r * sinc(q * r))
            .collect();
        4.0 * PI * lambda * weighted_integral(v, h, &g)
    });
    let integral = multiplier[0];

    let expected_integral = match profile {
        CorrelationProfile::Dirichlet(sol) => {
            let expected = 4.0 * PI * params.mu_tilde() * sol.a0;
            if (integral - expected).abs() > 1e-6 * expected.max(1e-300) {
                return Err(GpError::KernelIntegralMismatch {
                    found: integral,
                    expected,
                });
            }
            Some(expected)
        }
        CorrelationProfile::Neumann(n) => {
            // Integrating the Neumann equation over the ball: ∫ v f_L = E ∫ f_L.
            let inner: Vec<f64> = n.m_values[..=n.interior_nodes]
                .iter()
                .zip(&n.r_grid)
                .map(|(m, r)| m * r)
                .collect();
            let outer: Vec<f64> = n.m_values[n.interior_nodes..]
                .iter()
                .zip(&n.r_grid[n.interior_nodes..])
                .map(|(m, r)| m * r)
                .collect();
            let identity = 4.0
                * PI
                * lambda
                * n.energy
                * (simpson(&inner, n.step) + simpson(&outer, n.outer_step));
            if (integral - identity).abs() > 1e-4 * identity.max(1e-300) {
                return Err(GpError::KernelIntegralMismatch {
                    found: integral,
                    expected: identity,
                });
            }
            None
        }
    };

    let values = (0..m.len())
        .map(|i| lambda * v.profile(radii[i]) * profile.f(i))
        .collect();
    Ok(EffectiveKernel {
        mode: KernelMode::Scaled,
        g: integral,
        multiplier: Some(multiplier),
        radial: Some(RadialTable {
            step: h,
            values,
            scale: s,
            support: r0,
        }),
        expected_integral,
    })
}

/// Multiplier `k ↦ F(|k|/scale)` in FFT order, evaluating `F` once per distinct `|k|`.
pub(crate) fn radial_multiplier(grid: &Grid, scale: f64, transform: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut cache: HashMap<i64, f64> = HashMap::new();
    let dk = grid.dk();
    (0..grid.len())
        .map(|idx| {
            let mi = grid.multi_index(idx);
            let key: i64 = (0..grid.dim).map(|a| grid.frequency(mi[a]).pow(2)).sum();
            *cache
                .entry(key)
                .or_insert_with(|| transform((key as f64).sqrt() * dk / scale))
        })
        .collect()
}

/// Fourier multiplier of `s³ λ v(s·) f(s·)²`, the squared-profile interaction.
pub fn build_squared_kernel(
    params: &RegimeParams,
    v: &RadialPotential,
    sol: &ScatteringSolution,
    grid: &Grid,
) -> Result<EffectiveKernel, GpError> {
    params.validate()?;
    check_mu(params, sol.mu)?;
    if grid.dim != 3 {
        return Err(GpError::InvalidSetup(
            "scaled kernel is defined in three dimensions".into(),
        ));
    }
    let s = params.scale();
    let cells = v.support_radius() / s / grid.dx();
    if cells < 4.0 {
        return Err(GpError::UnresolvedKernel { cells });
    }
    let lambda = params.lambda();
    let h = sol.step;
    let m = sol.interior_m();
    let multiplier = radial_multiplier(grid, s, |q| {
        let g: Vec<f64> = m
            .iter()
            .enumerate()
            .map(|(i, mv)| mv * mv * sinc(q * i as f64 * h))
            .collect();
        4.0 * PI * lambda * weighted_integral(v, h, &g)
    });
    let values = (0..m.len())
        .map(|i| lambda * v.profile(i as f64 * h) * sol.f(i).powi(2))
        .collect();
    Ok(EffectiveKernel {
        mode: KernelMode::Scaled,
        g: multiplier[0],
        multiplier: Some(multiplier),
        radial: Some(RadialTable {
            step: h,
            values,
            scale: s,
            support: v.support_radius(),
        }),
        expected_integral: Some(4.0 * PI * params.mu_tilde() * (sol.a0 - sol.b0)),
    })
}

pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}
