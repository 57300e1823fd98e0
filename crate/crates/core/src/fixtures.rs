//! Reference configurations used by tests, the CLI defaults and the demo.
//!
//! The two-center seed comes from `examples/seed_search.rs`, which scans
//! `(cap_depth, dip_amp, dip_window)` for crossings of `H = −2, 0, +2`,
//! innermost first, inside `(δ/2, δ)` with clearance. The fixture takes the
//! first admissible cap depth and four times the smallest admissible dip,
//! which keeps the `+2` crossing steep.

use crate::error::Result;
use crate::gluing::{glue, ConformalField, GlueConfig, GlueMode};
use crate::grid::{AxialGrid, GridSpec};
use crate::seedprofile::{seed_profile, RadialProfile, SeedParams};

/// Mass calibration constant, printed by `examples/calibrate.rs` (m = 1
/// exterior seed at the chart center, default grid, box radius
/// [`CALIBRATION_RHO_MAX`]).
pub const C_CAL: f64 = 3.999_999_999_992_8;

/// Box radius of the calibration field.
pub const CALIBRATION_RHO_MAX: f64 = 16.0;

/// Support radius of the fixture seeds.
pub const FIXTURE_DELTA: f64 = 0.98;

/// Profiles are tabulated out to this radius.
pub const PROFILE_RHO_MAX: f64 = 40.0;

/// Unit-mass capped seed with a dip.
pub fn fixture_seed_params() -> SeedParams {
    SeedParams { m: 1.0, cap_depth: 4.7, dip_amp: 0.02, dip_window: (0.6, 0.95), delta: FIXTURE_DELTA }
}

pub fn fixture_seed() -> Result<RadialProfile> {
    seed_profile(&fixture_seed_params(), PROFILE_RHO_MAX)
}

/// Two equal fixture seeds at separation `2τ`.
pub fn two_center(tau: f64, mode: GlueMode) -> Result<GlueConfig> {
    let p = fixture_seed()?;
    GlueConfig::collinear(tau, vec![p.clone(), p], vec![FIXTURE_DELTA; 2], mode)
}

/// Glued field of a single exterior seed of mass `m` at axial position `z`.
pub fn exterior_field(m: f64, z: f64, rho_max: f64, spec: &GridSpec) -> Result<ConformalField> {
    let p = seed_profile(&SeedParams::exterior(m), PROFILE_RHO_MAX)?;
    let mut cfg = GlueConfig::collinear(1.0, vec![p], vec![1.0], GlueMode::Superposition)?;
    cfg.centers_z = vec![z];
    cfg.centers = vec![cfg.frame().axis_point(z)];
    glue(&cfg, AxialGrid::new(&cfg.centers_z, rho_max, spec)?)
}

/// The field [`C_CAL`] is computed on.
pub fn calibration_field(spec: &GridSpec) -> Result<ConformalField> {
    exterior_field(1.0, 0.0, CALIBRATION_RHO_MAX, spec)
}
