//! Seed → glue → solve → horizons → mass as one reproducible run, plus the
//! τ sweep and the refinement study.
//!
//! Every output is a pure function of the [`RunConfig`]; reports contain no
//! timings or paths, so repeated runs write identical bytes.

use crate::curvature::mean_curvature_radial;
use crate::error::{ConfigError, Error, Result};
use crate::fixtures::{fixture_seed_params, C_CAL, PROFILE_RHO_MAX};
use crate::gluing::{annulus_defect_max, curvature_defect, glue, ConformalField, DefectSummary, GlueConfig, GlueMode};
use crate::grid::{AxialGrid, GridSpec};
use crate::horizons::{detect, persistence_from, theta_sample, Displacement, HorizonReport, ScanSettings, TARGETS};
use crate::io::{write_csv, write_field, write_file, write_json, write_profile};
use crate::mass::{measure, AspectFit, MassReport};
use crate::seedprofile::{seed_profile, SeedParams};
use crate::stats::linear_fit;
use crate::yamabe::{
    barrier_check, coth_inequality, exhaust, max_curvature_defect, residual_u_form, Barrier, BarrierReport,
    DirichletSolve, SolveResult, SolveSettings, COERCIVITY_FLOOR,
};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

/// Smallest separation parameter accepted for multi-center solver runs.
pub const MIN_SOLVER_TAU: f64 = 3.0;

/// Default barrier radius is `2τ + BARRIER_OFFSET` about center 0: the
/// correction carries the tail of the inserted seed, centered `2τ` away.
pub const BARRIER_OFFSET: f64 = 0.5;

/// Bound on `max |R + 6|` outside the cores for the curvature check.
pub const CURVATURE_TOL: f64 = 1e-6;

/// Far-field slopes accepted for the decay check.
pub const SLOPE_BAND: (f64, f64) = (-3.15, -2.85);

/// Tolerance of the reflection check on symmetric configurations.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Exit {
    Ok = 0,
    Invariant = 2,
    Solver = 3,
    Config = 4,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn of_error(e: &Error) -> Exit {
        match e {
            Error::Config(_) | Error::Parse(_) | Error::SeedParams(_) | Error::Io(_) => Exit::Config,
            _ => Exit::Solver,
        }
    }
}

/// A run as read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub tau: f64,
    /// Defaults to three-zone for two centers, superposition otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<GlueMode>,
    /// Box half-width, default `3τ + 4`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_radius: Option<f64>,
    /// Barrier radius about center 0, default `2τ + 1/2` (`1/2` for one center).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_bar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_cal: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(rename = "center")]
    pub centers: Vec<SeedParams>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub solve: SolveSettings,
    #[serde(default)]
    pub scan: ScanSettings,
}

impl RunConfig {
    pub fn new(tau: f64, centers: Vec<SeedParams>) -> Self {
        RunConfig {
            schema: SCHEMA_VERSION,
            tau,
            mode: None,
            box_radius: None,
            rho_bar: None,
            c_cal: None,
            out: None,
            centers,
            grid: GridSpec::default(),
            solve: SolveSettings::default(),
            scan: ScanSettings::default(),
        }
    }

    /// Two fixture seeds at separation `2τ`.
    pub fn fixture(tau: f64) -> Self {
        RunConfig::new(tau, vec![fixture_seed_params(); 2])
    }

    /// `k` hyperbolic seeds.
    pub fn trivial(tau: f64, k: usize) -> Self {
        RunConfig::new(tau, vec![SeedParams::hyperbolic(); k])
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        RunConfig::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn glue_mode(&self) -> GlueMode {
        self.mode.unwrap_or(if self.centers.len() == 2 { GlueMode::ThreeZone } else { GlueMode::Superposition })
    }

    pub fn box_radius(&self) -> f64 {
        self.box_radius.unwrap_or(3.0 * self.tau + 4.0)
    }

    pub fn rho_bar(&self) -> f64 {
        let sep = 2.0 * self.tau * (self.centers.len().max(1) - 1) as f64;
        self.rho_bar.unwrap_or(sep + BARRIER_OFFSET)
    }

    pub fn c_cal(&self) -> f64 {
        self.c_cal.unwrap_or(C_CAL)
    }

    /// Same run at another separation, with τ-dependent defaults restored.
    pub fn with_tau(&self, tau: f64) -> Self {
        RunConfig { tau, box_radius: None, rho_bar: None, ..self.clone() }
    }

    /// Checks every invariant and builds the gluing data and grid. Nothing
    /// is solved.
    pub fn prepare(&self) -> Result<Prepared> {
        if self.schema != SCHEMA_VERSION {
            return Err(ConfigError::Schema(self.schema).into());
        }
        let k = self.centers.len();
        if k == 0 {
            return Err(ConfigError::NoCenters.into());
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(ConfigError::NonPositiveTau(self.tau).into());
        }
        if k > 1 && self.tau < MIN_SOLVER_TAU {
            return Err(ConfigError::TauTooSmall { tau: self.tau, min: MIN_SOLVER_TAU }.into());
        }
        self.solve.validate()?;
        let profiles = self.centers.iter().map(|p| seed_profile(p, PROFILE_RHO_MAX)).collect::<Result<Vec<_>>>()?;
        let deltas = self.centers.iter().map(|p| p.delta).collect();
        let glue_cfg = GlueConfig::collinear(self.tau, profiles, deltas, self.glue_mode())?;
        let rho_max = self.box_radius();
        let radii = self.solve.radii_for(self.tau, rho_max)?;
        let grid = AxialGrid::new(&glue_cfg.centers_z, rho_max, &self.grid)?;
        let reach = rho_max + glue_cfg.centers_z[0].abs();
        let rho_bar = self.rho_bar();
        if !(rho_bar > 0.0 && rho_bar < reach) {
            return Err(ConfigError::Invalid(format!("barrier radius {rho_bar} outside (0, {reach})")).into());
        }
        if !(self.c_cal() > 0.0) {
            return Err(ConfigError::Invalid(format!("c_cal must be positive, got {}", self.c_cal())).into());
        }
        Ok(Prepared { glue: glue_cfg, grid, radii, rho_bar, barrier_reach: reach })
    }
}

/// A validated run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub glue: GlueConfig,
    pub grid: AxialGrid,
    pub radii: Vec<f64>,
    pub rho_bar: f64,
    /// Largest distance from center 0 inside the box.
    pub barrier_reach: f64,
}

impl Prepared {
    pub fn glued(&self) -> Result<ConformalField> {
        glue(&self.glue, self.grid.clone())
    }
}

/// One named check in a run summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Hard checks decide the exit status; the rest are reported.
    pub hard: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, hard: bool, detail: String) -> Self {
        Check { name: name.into(), passed, hard, detail }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub radii: Vec<f64>,
    pub solves: Vec<DirichletSolve>,
    pub diffs: Vec<f64>,
    pub sup_dev: f64,
    pub min_w: f64,
    pub final_residual: f64,
    pub newton_steps: usize,
}

impl SolveSummary {
    pub fn of(r: &SolveResult) -> Self {
        SolveSummary {
            radii: r.solves.iter().map(|s| s.radius).collect(),
            solves: r.solves.clone(),
            diffs: r.diffs.clone(),
            sup_dev: r.sup_dev,
            min_w: r.min_w,
            final_residual: r.final_residual(),
            newton_steps: r.newton_steps(),
        }
    }
}

/// One surface in compact form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSummary {
    pub center: usize,
    pub target: f64,
    pub found: bool,
    pub mean_radius: f64,
    pub roundness: f64,
    pub certificate: Option<(f64, f64)>,
}

pub fn surfaces(rep: &HorizonReport) -> Vec<SurfaceSummary> {
    rep.records
        .iter()
        .map(|r| SurfaceSummary {
            center: r.center,
            target: r.target,
            found: r.found(),
            mean_radius: r.mean_radius,
            roundness: r.roundness,
            certificate: r.certificate,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AspectSummary {
    pub window: (f64, f64),
    pub slope_range: (f64, f64),
    pub residual: f64,
    pub reflection_asymmetry: f64,
    pub degenerate: bool,
}

impl AspectSummary {
    pub fn of(fit: &AspectFit) -> Self {
        AspectSummary {
            window: fit.window,
            slope_range: if fit.degenerate { (f64::NAN, f64::NAN) } else { fit.slope_range() },
            residual: fit.residual,
            reflection_asymmetry: fit.reflection_asymmetry(),
            degenerate: fit.degenerate,
        }
    }
}

/// The report written as `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: RunConfig,
    pub mode: GlueMode,
    pub nodes: usize,
    pub glued_defect: DefectSummary,
    /// Largest `|R_g̃ + 6|` on the gluing annulus (three-zone only).
    pub annulus_defect: Option<f64>,
    /// Largest `|R + 6|` of the solved metric outside the cores.
    pub solved_defect: f64,
    pub solve: SolveSummary,
    pub surfaces_glued: Vec<SurfaceSummary>,
    pub surfaces: Vec<SurfaceSummary>,
    pub nested: Vec<bool>,
    pub separation: f64,
    pub persistence: Vec<Displacement>,
    pub aspect: AspectSummary,
    pub mass: MassReport,
    pub barrier: BarrierReport,
    /// Smallest `ln` ratio in `(coth ρ − 1) e^{−3ρ} > 2 e^{−5ρ}` on `[1, 20]`.
    pub coth_margin: f64,
    pub checks: Vec<Check>,
    pub exit: Exit,
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunBundle {
    pub prepared: Prepared,
    pub glued: ConformalField,
    pub solved: SolveResult,
    pub horizons_glued: HorizonReport,
    pub horizons: HorizonReport,
    pub fit: AspectFit,
    pub summary: RunSummary,
}

/// Symmetric under `z → −z`: superposition of identical seeds.
fn reflection_symmetric(cfg: &GlueConfig) -> bool {
    let k = cfg.profiles.len();
    cfg.mode == GlueMode::Superposition && (0..k).all(|i| cfg.profiles[i] == cfg.profiles[k - 1 - i])
}

pub fn run_pipeline(config: &RunConfig) -> Result<RunBundle> {
    let prepared = config.prepare()?;
    let glued = prepared.glued()?;
    let (_, glued_defect) = curvature_defect(&glued);
    let annulus_defect =
        (prepared.glue.mode == GlueMode::ThreeZone).then(|| annulus_defect_max(&glued.metric, 64, 64));
    let settings = SolveSettings { radii: prepared.radii.clone(), ..config.solve.clone() };
    let solved = exhaust(&glued, &settings)?;
    let last = *prepared.radii.last().expect("radii are nonempty");
    let solved_defect = max_curvature_defect(&solved.field, last);
    let horizons_glued = detect(&glued, &config.scan)?;
    let horizons = detect(&solved.field, &config.scan)?;
    let persistence = persistence_from(&horizons_glued, &horizons);
    let (fit, mass) = measure(&solved.field, config.c_cal())?;
    let barrier = barrier_check(&solved.field, Barrier::new(prepared.rho_bar), prepared.barrier_reach);
    let coth_margin = coth_inequality(1.0, 20.0, 2000);

    let mut checks = vec![
        Check::new(
            "positivity",
            solved.min_w > COERCIVITY_FLOOR,
            true,
            format!("min w = {:.6}, floor {COERCIVITY_FLOOR:.6}", solved.min_w),
        ),
        Check::new(
            "barrier envelope",
            barrier.holds,
            true,
            format!("{} violations of {} nodes, worst margin {:.3e}", barrier.violations, barrier.checked, barrier.worst_margin),
        ),
        Check::new(
            "horizon persistence",
            persistence.iter().all(|d| !d.lost()),
            true,
            format!("{} of {} glued surfaces kept", persistence.iter().filter(|d| d.present_before && d.present_after).count(), persistence.iter().filter(|d| d.present_before).count()),
        ),
        Check::new("mass radicand", mass.valid, true, format!("monopole² − dipole² = {:.6e}", mass.radicand)),
    ];
    if !fit.degenerate {
        let (lo, hi) = fit.slope_range();
        checks.push(Check::new(
            "decay slope",
            lo >= SLOPE_BAND.0 && hi <= SLOPE_BAND.1,
            true,
            format!("fitted slopes in [{lo:.5}, {hi:.5}]"),
        ));
    }
    let nk = prepared.glue.centers_z.len();
    for k in 0..nk {
        let had_all = TARGETS.iter().all(|&t| horizons_glued.record(k, t).is_some_and(|r| r.found()));
        if had_all {
            let ok = horizons.nested[k] && horizons.placed && horizons.certified;
            checks.push(Check::new(
                &format!("horizons at center {k}"),
                ok,
                true,
                format!("nested {}, placed {}, certified {}", horizons.nested[k], horizons.placed, horizons.certified),
            ));
        }
    }
    checks.push(Check::new(
        "curvature target",
        solved_defect <= CURVATURE_TOL,
        false,
        format!("max |R + 6| outside cores = {solved_defect:.3e}"),
    ));
    checks.push(Check::new("L(f-) > 0", barrier.sub_ok, false, format!("min L(f-) = {:.4e} at rho = {:.4}", barrier.sub_min, barrier.sub_min_rho)));
    checks.push(Check::new("L(f+) < 0", barrier.super_ok, false, format!("max L(f+) = {:.4e}", barrier.super_max)));
    checks.push(Check::new("coth inequality", coth_margin > 0.0, false, format!("min log margin {coth_margin:.3e}")));
    if reflection_symmetric(&prepared.glue) && !fit.degenerate {
        let a = fit.reflection_asymmetry();
        checks.push(Check::new("aspect reflection symmetry", a <= SYMMETRY_TOL, false, format!("max |A(θ) − A(π − θ)| / max |A| = {a:.3e}")));
    }
    let exit = if checks.iter().all(|c| c.passed || !c.hard) { Exit::Ok } else { Exit::Invariant };

    let summary = RunSummary {
        config: config.clone(),
        mode: prepared.glue.mode,
        nodes: prepared.grid.len(),
        glued_defect,
        annulus_defect,
        solved_defect,
        solve: SolveSummary::of(&solved),
        surfaces_glued: surfaces(&horizons_glued),
        surfaces: surfaces(&horizons),
        nested: horizons.nested.clone(),
        separation: horizons.separation,
        persistence,
        aspect: AspectSummary::of(&fit),
        mass,
        barrier,
        coth_margin,
        checks,
        exit,
    };
    Ok(RunBundle { prepared, glued, solved, horizons_glued, horizons, fit, summary })
}

/// `H(ρ)` along the poles and the equator of each center, on the scan grid.
pub fn h_table(field: &ConformalField, scan: &ScanSettings) -> Vec<Vec<f64>> {
    let n = ((scan.rho_max - scan.rho_min) / scan.step).ceil() as usize;
    let nk = field.metric.cfg.centers_z.len();
    let thetas = [theta_sample(0, 3), theta_sample(1, 3), theta_sample(2, 3)];
    let mut rows = Vec::new();
    for k in 0..nk {
        for i in 0..=n {
            let rho = scan.rho_min + (scan.rho_max - scan.rho_min) * i as f64 / n as f64;
            let mut row = vec![k as f64, rho];
            row.extend(thetas.iter().map(|&t| crate::horizons::mean_curvature_at(field, k, rho, t)));
            rows.push(row);
        }
    }
    rows
}

pub const H_TABLE_HEADER: [&str; 5] = ["center", "rho", "h_theta_0", "h_theta_pi_2", "h_theta_pi"];

/// Writes seed profiles and their `H(ρ)` tables.
pub fn write_seeds(prepared: &Prepared, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (k, p) in prepared.glue.profiles.iter().enumerate() {
        write_file(dir.join(format!("profile_{k}.txt")), |w| write_profile(p, w))?;
        let n = 1000;
        let rows: Vec<Vec<f64>> = (1..=n)
            .map(|i| {
                let rho = 2.0 * i as f64 / n as f64;
                let (w, _, _) = p.eval(rho);
                vec![rho, w, mean_curvature_radial(p, rho)]
            })
            .collect();
        write_csv(dir.join(format!("seed_h_{k}.csv")), &["rho", "w", "h"], &rows)?;
    }
    Ok(())
}

/// Writes the glued field and its defect summary.
pub fn write_glued(field: &ConformalField, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_file(dir.join("glued_field.txt"), |w| write_field(field, w))?;
    let (_, summary) = curvature_defect(field);
    write_json(dir.join("glue_defect.json"), &summary)
}

/// Writes the solved field, the solve summary and the Newton history.
pub fn write_solve(result: &SolveResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_file(dir.join("solved_field.txt"), |w| write_field(&result.field, w))?;
    write_json(dir.join("solve.json"), &SolveSummary::of(result))?;
    let rows: Vec<Vec<f64>> = result
        .solves
        .iter()
        .flat_map(|s| s.trace.iter().enumerate().map(move |(i, &r)| vec![s.radius, i as f64, r]))
        .collect();
    write_csv(dir.join("convergence.csv"), &["radius", "step", "scaled_residual"], &rows)
}

pub fn write_horizons(report: &HorizonReport, field: &ConformalField, scan: &ScanSettings, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_json(dir.join("horizons.json"), report)?;
    write_csv(dir.join("h_profiles.csv"), &H_TABLE_HEADER, &h_table(field, scan))
}

pub fn write_mass(fit: &AspectFit, mass: &MassReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    #[derive(Serialize)]
    struct MassFile<'a> {
        report: &'a MassReport,
        aspect: AspectSummary,
    }
    write_json(dir.join("mass.json"), &MassFile { report: mass, aspect: AspectSummary::of(fit) })?;
    let rows: Vec<Vec<f64>> = (0..fit.theta.len()).map(|j| vec![fit.theta[j], fit.amplitude[j], fit.slope[j]]).collect();
    write_csv(dir.join("aspect.csv"), &["theta", "amplitude", "slope"], &rows)
}

impl RunBundle {
    /// Writes every artifact of the run into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_seeds(&self.prepared, dir)?;
        write_glued(&self.glued, dir)?;
        write_solve(&self.solved, dir)?;
        write_horizons(&self.horizons, &self.solved.field, &self.summary.config.scan, dir)?;
        write_mass(&self.fit, &self.summary.mass, dir)?;
        write_json(dir.join("summary.json"), &self.summary)
    }
}

/// `ln`-slope of `values` against `x`, over the finite positive entries.
/// `None` when fewer than two remain.
pub fn log_slope(x: &[f64], values: &[f64]) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        x.iter().zip(values).filter(|(_, v)| v.is_finite() && **v > 0.0).map(|(a, v)| (*a, v.ln())).unzip();
    (xs.len() >= 2).then(|| linear_fit(&xs, &ys).0)
}

/// Strictly decreasing, with exact zeros allowed to repeat once reached.
pub fn monotone_decrease(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tau: f64,
    /// Largest `|R_g̃ + 6|` on the gluing annulus, or over the glued field
    /// outside the cores for superposition.
    pub glue_defect: f64,
    pub sup_dev: f64,
    /// `max_θ` displacement per surface, ordered by center then target.
    pub shifts: Vec<f64>,
    pub max_shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub defect_slope: Option<f64>,
    pub sup_dev_slope: Option<f64>,
    /// Over the τ with a nonzero displacement.
    pub shift_slope: Option<f64>,
    /// Per surface: its displacement decreases strictly along the sweep.
    pub shift_monotone: Vec<bool>,
    /// A slope could not be fitted (values at roundoff or zero).
    pub degenerate: bool,
    /// The τ at which a member failed, with the error.
    pub failure: Option<(f64, String)>,
    #[serde(skip)]
    pub exit: Option<Exit>,
}

impl SweepReport {
    pub fn csv_rows(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| {
                let mut v = vec![r.tau, r.glue_defect, r.sup_dev, r.max_shift];
                v.extend(&r.shifts);
                v
            })
            .collect()
    }

    pub fn csv_header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["tau", "glue_defect", "sup_dev", "max_shift"].iter().map(|s| s.to_string()).collect();
        let n = self.rows.first().map_or(0, |r| r.shifts.len());
        for i in 0..n {
            h.push(format!("shift_c{}_h{:+}", i / TARGETS.len(), TARGETS[i % TARGETS.len()]));
        }
        h
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let header = self.csv_header();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        write_csv(dir.join("sweep.csv"), &header, &self.csv_rows())?;
        write_json(dir.join("sweep.json"), self)
    }
}

fn sweep_member(config: &RunConfig) -> Result<SweepRow> {
    let prepared = config.prepare()?;
    let glued = prepared.glued()?;
    let glue_defect = match prepared.glue.mode {
        GlueMode::ThreeZone => annulus_defect_max(&glued.metric, 64, 64),
        GlueMode::Superposition => curvature_defect(&glued).1.glue_defect,
    };
    let settings = SolveSettings { radii: prepared.radii.clone(), ..config.solve.clone() };
    let solved = exhaust(&glued, &settings)?;
    let before = detect(&glued, &config.scan)?;
    let after = detect(&solved.field, &config.scan)?;
    let shifts: Vec<f64> = persistence_from(&before, &after).iter().map(|d| d.max_shift).collect();
    let max_shift = shifts.iter().cloned().filter(|s| s.is_finite()).fold(0.0, f64::max);
    Ok(SweepRow { tau: config.tau, glue_defect, sup_dev: solved.sup_dev, shifts, max_shift })
}

/// Runs `config` at each τ. A failing member stops the sweep; the rows
/// computed so far are kept in the report.
pub fn sweep_tau(config: &RunConfig, taus: &[f64]) -> Result<SweepReport> {
    if taus.len() < 3 {
        return Err(ConfigError::SweepTooShort(taus.len()).into());
    }
    for &t in taus {
        config.with_tau(t).prepare()?;
    }
    let mut rows = Vec::new();
    let mut failure = None;
    let mut exit = None;
    for &t in taus {
        match sweep_member(&config.with_tau(t)) {
            Ok(r) => rows.push(r),
            Err(e) => {
                exit = Some(Exit::of_error(&e));
                failure = Some((t, e.to_string()));
                break;
            }
        }
    }
    let x: Vec<f64> = rows.iter().map(|r| r.tau).collect();
    let defect: Vec<f64> = rows.iter().map(|r| r.glue_defect).collect();
    let sup: Vec<f64> = rows.iter().map(|r| r.sup_dev).collect();
    let shift: Vec<f64> = rows.iter().map(|r| r.max_shift).collect();
    let full = |v: &[f64]| v.len() >= 3 && v.iter().all(|a| a.is_finite() && *a > 1e-300);
    let defect_slope = full(&defect).then(|| log_slope(&x, &defect)).flatten();
    let sup_dev_slope = full(&sup).then(|| log_slope(&x, &sup)).flatten();
    let shift_slope = log_slope(&x, &shift);
    let n_surf = rows.first().map_or(0, |r| r.shifts.len());
    let shift_monotone = (0..n_surf)
        .map(|i| {
            let s: Vec<f64> = rows.iter().map(|r| r.shifts[i]).collect();
            s.iter().all(|v| v.is_finite()) && monotone_decrease(&s)
        })
        .collect();
    Ok(SweepReport {
        degenerate: defect_slope.is_none() || sup_dev_slope.is_none(),
        rows,
        defect_slope,
        sup_dev_slope,
        shift_slope,
        shift_monotone,
        failure,
        exit,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineRow {
    pub level: u32,
    pub nodes: usize,
    /// `max |·|` of the original-form residual inside the last ball.
    pub residual: f64,
    /// `max |R + 6|` outside the cores.
    pub defect: f64,
    pub sup_dev: f64,
    /// Mean radius per surface, ordered by center then target.
    pub radii: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineReport {
    pub rows: Vec<RefineRow>,
    /// `log₂` of successive defect ratios.
    pub defect_order: Vec<f64>,
    /// Per surface, `log₂` of successive radius-difference ratios (needs
    /// three levels).
    pub radius_order: Vec<Vec<f64>>,
}

impl RefineReport {
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let n = self.rows.first().map_or(0, |r| r.radii.len());
        let mut header: Vec<String> =
            ["level", "nodes", "residual", "defect", "sup_dev"].iter().map(|s| s.to_string()).collect();
        for i in 0..n {
            header.push(format!("radius_c{}_h{:+}", i / TARGETS.len(), TARGETS[i % TARGETS.len()]));
        }
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows: Vec<Vec<f64>> = self
            .rows
            .iter()
            .map(|r| {
                let mut v = vec![r.level as f64, r.nodes as f64, r.residual, r.defect, r.sup_dev];
                v.extend(&r.radii);
                v
            })
            .collect();
        write_csv(dir.join("refine.csv"), &header, &rows)?;
        write_json(dir.join("refine.json"), self)
    }
}

/// Solves `config` on levels `grid.level, …, grid.level + levels − 1`. All
/// grids are checked against the node budget before any solve.
pub fn refine_study(config: &RunConfig, levels: usize) -> Result<RefineReport> {
    if levels < 2 {
        return Err(ConfigError::TooFewLevels(levels).into());
    }
    let configs: Vec<RunConfig> = (0..levels)
        .map(|l| RunConfig { grid: GridSpec { level: config.grid.level + l as u32, ..config.grid }, ..config.clone() })
        .collect();
    let prepared = configs.iter().map(RunConfig::prepare).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (c, p) in configs.iter().zip(&prepared) {
        let glued = p.glued()?;
        let settings = SolveSettings { radii: p.radii.clone(), ..c.solve.clone() };
        let solved = exhaust(&glued, &settings)?;
        let last = *p.radii.last().expect("radii are nonempty");
        let residual = residual_u_form(&solved.field)
            .iter()
            .enumerate()
            .filter(|(i, v)| v.is_finite() && p.grid.rho_mid(*i) < last)
            .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
        let defect = max_curvature_defect(&solved.field, last);
        let hor = detect(&solved.field, &c.scan)?;
        rows.push(RefineRow {
            level: c.grid.level,
            nodes: p.grid.len(),
            residual,
            defect,
            sup_dev: solved.sup_dev,
            radii: hor.records.iter().map(|r| if r.found() { r.mean_radius } else { f64::NAN }).collect(),
        });
    }
    let defect_order = rows.windows(2).map(|w| (w[0].defect / w[1].defect).log2()).collect();
    let n = rows[0].radii.len();
    let radius_order = (0..n)
        .map(|i| {
            rows.windows(3)
                .map(|w| ((w[1].radii[i] - w[0].radii[i]) / (w[2].radii[i] - w[1].radii[i])).abs().log2())
                .collect()
        })
        .collect();
    Ok(RefineReport { rows, defect_order, radius_order })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_toml() {
        let mut c = RunConfig::fixture(4.0);
        c.mode = Some(GlueMode::Superposition);
        c.grid.level = 1;
        let text = c.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), c);
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let c = RunConfig::from_toml("schema = 1\ntau = 4.0\n[[center]]\n[[center]]\n").unwrap();
        assert_eq!(c.centers, vec![SeedParams::hyperbolic(); 2]);
        assert_eq!(c.glue_mode(), GlueMode::ThreeZone);
        assert_eq!(c.box_radius(), 16.0);
        assert_eq!(c.rho_bar(), 8.5);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(RunConfig::from_toml("schema = 1\ntau = 4.0\ncenters = 2\n"), Err(Error::Parse(_))));
    }

    #[test]
    fn log_slope_skips_zeros() {
        let x = [3.0, 4.0, 5.0, 6.0];
        let v = [(-9.0f64).exp(), (-12.0f64).exp(), 0.0, 0.0];
        assert!((log_slope(&x, &v).unwrap() + 3.0).abs() < 1e-12);
        assert!(log_slope(&x, &[1.0, 0.0, 0.0, 0.0]).is_none());
        assert!(monotone_decrease(&v));
        assert!(!monotone_decrease(&[1.0, 1.0]));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Exit::of_error(&ConfigError::NoCenters.into()), Exit::Config);
        assert_eq!(Exit::of_error(&Error::Exhaustion { diffs: vec![] }), Exit::Solver);
        assert_eq!(Exit::Invariant.code(), 2);
    }
}
