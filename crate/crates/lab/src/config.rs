//! Experiment configuration: a TOML (or JSON) key tree, echoed verbatim into the manifest
//! and deserialized into a typed schema per subcommand.

use std::path::{Path, PathBuf};

use bec_lab_core::eikonal::InitialPhase;
use bec_lab_core::spectral::Grid;
use bec_lab_core::{PotentialSpec, RadialPotential, RegimeParams};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::error::{LabError, LabResult};

/// Parsed configuration tree with its source path.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub path: PathBuf,
    pub tree: Value,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::config(format!("cannot read {}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let tree = if is_json {
            serde_json::from_str(&text).map_err(|e| LabError::config(format!("JSON: {e}")))?
        } else {
            let t: toml::Table = toml::from_str(&text).map_err(|e| LabError::config(format!("TOML: {e}")))?;
            serde_json::to_value(t).map_err(|e| LabError::config(e.to_string()))?
        };
        if !tree.is_object() {
            return Err(LabError::config("top level must be a table"));
        }
        Ok(Self {
            path: path.to_path_buf(),
            tree,
        })
    }

    pub fn parse<T: DeserializeOwned>(&self) -> LabResult<T> {
        serde_json::from_value(self.tree.clone()).map_err(|e| LabError::config(e.to_string()))
    }

    pub fn output_dir(&self) -> Option<PathBuf> {
        self.tree.get("output_dir").and_then(Value::as_str).map(PathBuf::from)
    }
}

pub fn potential(spec: &PotentialSpec) -> LabResult<RadialPotential> {
    spec.build().map_err(|e| LabError::config(e.to_string()))
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    #[serde(rename = "L", alias = "box_len")]
    pub box_len: f64,
}

impl GridSpec {
    pub fn build(&self) -> LabResult<Grid> {
        Grid::new(self.dim, self.n, self.box_len).map_err(LabError::config)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    #[serde(rename = "N")]
    pub n: f64,
    pub eps: f64,
    pub beta: f64,
    pub kappa: f64,
    #[serde(default)]
    pub alpha: f64,
}

impl ParamsSpec {
    pub fn build(&self) -> LabResult<RegimeParams> {
        RegimeParams::new(self.n, self.eps, self.beta, self.kappa, self.alpha)
            .map_err(|e| LabError::config(e.to_string()))
    }
}

/// Either an explicit list or a log-spaced range.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ValueList {
    List(Vec<f64>),
    LogRange { min: f64, max: f64, points: usize },
}

impl ValueList {
    pub fn values(&self) -> LabResult<Vec<f64>> {
        let v = match self {
            Self::List(v) => v.clone(),
            Self::LogRange { min, max, points } => {
                if !(*min > 0.0 && max > min && *points >= 2) {
                    return Err(LabError::config("log range needs 0 < min < max and points >= 2"));
                }
                let (a, b) = (max.ln(), min.ln());
                (0..*points)
                    .map(|i| (a + (b - a) * i as f64 / (*points - 1) as f64).exp())
                    .collect()
            }
        };
        if v.is_empty() || v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(LabError::config("value list must be non-empty and positive"));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterConfig {
    pub potential: PotentialSpec,
    pub mu: ValueList,
    pub step: Option<f64>,
    #[serde(default = "yes")]
    pub profiles: bool,
    pub output_dir: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeumannConfig {
    pub potential: PotentialSpec,
    pub mu: f64,
    #[serde(rename = "L")]
    pub box_radii: Vec<f64>,
    pub step: Option<f64>,
    #[serde(default = "tight")]
    pub energy_tol: f64,
    #[serde(default = "yes")]
    pub profiles: bool,
    pub output_dir: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateConfig {
    #[serde(default = "one")]
    pub v0: f64,
    #[serde(rename = "R0", default = "one")]
    pub r0: f64,
    /// Vanishing orders; `0` selects the step potential.
    pub n: Vec<f64>,
    pub mu: ValueList,
    pub output_dir: Option<String>,
}

/// Initial wave functions of the GP runner.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialField {
    /// `e^{iξ·x}` normalized.
    PlaneWave { xi: [f64; 3] },
    /// Semiclassical Gaussian packet centred at `center` with momentum `momentum`.
    Gaussian {
        center: [f64; 3],
        sigma: f64,
        #[serde(default)]
        momentum: [f64; 3],
    },
    /// Constant amplitude.
    Uniform,
    /// `√(1 + a cos x₁) e^{i b sin x₁ / ε}`.
    Wkb { density_amp: f64, phase_amp: f64 },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Noise {
    pub amplitude: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Zero,
    Delta { g: f64 },
    /// Kernel from the scattering problem of `potential` under the regime tuple.
    Regime {
        potential: PotentialSpec,
        params: ParamsSpec,
        #[serde(default)]
        scaled: bool,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpRunConfig {
    pub eps: f64,
    pub grid: GridSpec,
    pub kernel: KernelSpec,
    pub initial: InitialField,
    pub noise: Option<Noise>,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(default = "snapshots")]
    pub snapshots_per_unit_time: f64,
    pub output_dir: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EulerRunConfig {
    pub c: f64,
    pub grid: GridSpec,
    /// `ρ = (1 + a cos(k x₁)) / vol`, `u₁ = b sin(k x₁) + drift`.
    pub density_amp: f64,
    pub velocity_amp: f64,
    #[serde(default)]
    pub drift: f64,
    #[serde(default = "one")]
    pub wavenumber: f64,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(default = "snapshot_count")]
    pub snapshots: usize,
    pub output_dir: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EikonalRunConfig {
    pub grid: GridSpec,
    pub phase: InitialPhase,
    /// Amplitude `1 + a cos x₁ + i b sin x₁`, normalized.
    pub amplitude: [f64; 2],
    #[serde(default)]
    pub c0: f64,
    pub times: Vec<f64>,
    #[serde(default = "hj_dt")]
    pub hj_dt: f64,
    pub output_dir: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModEnergyConfig {
    pub grid: GridSpec,
    pub c: f64,
    pub eps: Vec<f64>,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub euler_dt: f64,
    /// GP step as a multiple of `ε`.
    pub gp_dt_factor: f64,
    #[serde(default = "half")]
    pub corrector: f64,
    pub output_dir: Option<String>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSpec {
    Eikonal,
    FreeEvolution,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WkbSweepConfig {
    pub potential: PotentialSpec,
    pub params: Vec<ParamsSpec>,
    pub grid: GridSpec,
    pub phase: InitialPhase,
    pub amplitude: [f64; 2],
    pub t: f64,
    #[serde(default = "two")]
    pub sobolev_index: f64,
    pub reference: ReferenceSpec,
    pub output_dir: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairCheckConfig {
    pub potential: PotentialSpec,
    pub grid: GridSpec,
    pub eps: Vec<f64>,
    /// Box radius held fixed along the GP-regime sweep, `N = L / ε⁶`.
    pub box_radius: f64,
    #[serde(default)]
    pub kinetic_scales: Vec<f64>,
    #[serde(default = "half")]
    pub kinetic_eps: f64,
    pub output_dir: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptanceConfig {
    #[serde(default = "all_criteria")]
    pub criteria: Vec<u32>,
    pub output_dir: Option<String>,
}

fn yes() -> bool {
    true
}
fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn half() -> f64 {
    0.5
}
fn tight() -> f64 {
    1e-12
}
fn snapshots() -> f64 {
    32.0
}
fn snapshot_count() -> usize {
    20
}
fn hj_dt() -> f64 {
    1e-3
}
fn all_criteria() -> Vec<u32> {
    (1..=12).collect()
}

/// Rejects non-finite or non-positive numbers with a named message.
pub fn positive(name: &str, x: f64) -> LabResult<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(LabError::config(format!("{name} must be positive and finite, got {x}")))
    }
}
