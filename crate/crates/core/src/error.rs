use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {coords:?} lies outside the {model} model domain")]
    Domain { coords: [f64; 3], model: &'static str },

    #[error("quadrature did not converge on [{a}, {b}]: estimate {estimate:e}, error {error:e}")]
    Quadrature { a: f64, b: f64, estimate: f64, error: f64 },

    #[error("invalid seed parameters: {0}")]
    SeedParams(String),

    #[error("seed construction failed: {0}")]
    Construction(String),

    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),

    #[error("conformal factor is not positive at node {node} (w = {value})")]
    NonPositive { node: usize, value: f64 },

    #[error("newton iteration did not converge on radius {radius}: residual trace {trace:?}")]
    NewtonDivergence { radius: f64, trace: Vec<f64> },

    #[error("exhaustion did not converge: successive differences {diffs:?}")]
    Exhaustion { diffs: Vec<f64> },

    #[error("singular pivot {pivot:e} in row {row}")]
    SingularPivot { row: usize, pivot: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Named violations of run / glue / solver configuration invariants.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("need at least one center")]
    NoCenters,
    #[error("tau must be positive, got {0}")]
    NonPositiveTau(f64),
    #[error("tau >= {min} required for solver runs, got {tau}")]
    TauTooSmall { tau: f64, min: f64 },
    #[error("profiles ({profiles}) and centers ({centers}) differ in count")]
    ProfileCount { profiles: usize, centers: usize },
    #[error("centers {i} and {j}: separation {sep} <= delta_i + delta_j = {sum}")]
    CentersTooClose { i: usize, j: usize, sep: f64, sum: f64 },
    #[error("core B(delta = {delta}) of center {center} meets the gluing annulus [{inner}, {outer}] around center {around} (distance {dist})")]
    AnnulusOverlapsCore { center: usize, delta: f64, around: usize, inner: f64, outer: f64, dist: f64 },
    #[error("grid radius {rho_max} < 3 tau = {needed}")]
    GridTooSmall { rho_max: f64, needed: f64 },
    #[error("exhaustion radii must increase strictly: {0:?}")]
    RadiiNotIncreasing(Vec<f64>),
    #[error("first exhaustion radius {first} < 3 tau = {needed}")]
    FirstRadiusTooSmall { first: f64, needed: f64 },
    #[error("exhaustion radius {radius} exceeds grid radius {rho_max}")]
    RadiusBeyondGrid { radius: f64, rho_max: f64 },
    #[error("grid has {nodes} nodes, above the budget of {budget}")]
    NodeBudget { nodes: usize, budget: usize },
    #[error("sweep needs at least 3 tau values, got {0}")]
    SweepTooShort(usize),
    #[error("refinement study needs at least 2 levels, got {0}")]
    TooFewLevels(usize),
    #[error("unsupported schema version {0}")]
    Schema(u32),
    #[error("{0}")]
    Invalid(String),
}
