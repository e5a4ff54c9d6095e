use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScatteringError {
    #[error("semiclassical parameter must be positive, got {0}")]
    NonPositiveMu(f64),
    #[error("step {step} does not resolve the boundary layer (limit {limit})")]
    StepTooCoarse { step: f64, limit: f64 },
    #[error("negative potential sample {value} at r = {r}")]
    InvalidPotential { r: f64, value: f64 },
    #[error("invalid potential parameters: {0}")]
    InvalidSpec(String),
    #[error("solution grid does not match the potential support")]
    GridMismatch,
    #[error("kinetic fraction came out negative ({0})")]
    NegativeResult(f64),
    #[error("no sign change of the Neumann condition below E = {upper}")]
    BracketFailure { upper: f64 },
    #[error("ground-state candidate changes sign near r = {r}")]
    NodeDetected { r: f64 },
    #[error("box radius {l} must be at least twice the support radius {r0}")]
    BoxTooSmall { l: f64, r0: f64 },
    #[error("scattering rate not decreasing along the sequence at mu = {mu}")]
    NonMonotoneEta { mu: f64 },
    #[error("rate fit needs at least two admissible points, got {0}")]
    InsufficientPoints(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GpError {
    #[error("rescaled kernel support spans {cells:.2} cells, at least 4 are required")]
    UnresolvedKernel { cells: f64 },
    #[error("time step {dt} exceeds the stability budget {budget}")]
    StabilityViolation { dt: f64, budget: f64 },
    #[error("non-finite value encountered at t = {t}")]
    NaNDetected { t: f64 },
    #[error("continuity residual needs at least 3 snapshots, got {0}")]
    InsufficientSnapshots(usize),
    #[error("kernel integral {found} deviates from the expected {expected}")]
    KernelIntegralMismatch { found: f64, expected: f64 },
    #[error("invalid grid or kernel configuration: {0}")]
    InvalidSetup(String),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EulerError {
    #[error("time step {dt} violates the CFL limit {limit}")]
    CFLViolation { dt: f64, limit: f64 },
    #[error("density undershoot {min} below tolerance at t = {t}")]
    NegativeDensity { min: f64, t: f64 },
    #[error("non-finite value encountered at t = {t}")]
    NaNDetected { t: f64 },
    #[error("invalid fluid configuration: {0}")]
    InvalidSetup(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EikonalError {
    #[error("time {t} is at or beyond the caustic time {caustic}")]
    PastCaustic { t: f64, caustic: f64 },
    #[error("flow inversion diverged at node {index} (x = {x:?})")]
    NewtonDivergence { index: usize, x: Vec<f64> },
    #[error("linear phase wave vector {0:?} is not commensurate with the grid")]
    IncommensuratePhase(Vec<f64>),
    #[error("invalid eikonal configuration: {0}")]
    InvalidSetup(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("snapshot times differ between trajectories")]
    DesyncedTrajectories,
    #[error("slope fit failed: {0}")]
    FitFailure(String),
    #[error(transparent)]
    Gp(#[from] GpError),
    #[error(transparent)]
    Euler(#[from] EulerError),
    #[error(transparent)]
    Eikonal(#[from] EikonalError),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PairError {
    #[error("correlation support spans {cells:.2} cells and quadrature mode is unavailable")]
    UnresolvedSupport { cells: f64 },
    #[error("near-origin gradient weight is not integrable at this resolution")]
    QuadratureSingular,
    #[error("pair kernel requires a three-dimensional field, got dimension {0}")]
    UnsupportedDimension(usize),
}
