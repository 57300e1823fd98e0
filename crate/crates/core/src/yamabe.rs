//! Conformal correction of a glued metric to its target scalar curvature.
//!
//! With `g̃ = w̃⁴ g_H` and `w = w̃ u`, the equation for `u = 1 + δ` is
//! `Δ_g̃ u − R_g̃ u / 8 + R_t u⁵ / 8 = 0`, multiplied through by `w̃⁴`:
//!
//! `F(δ) = Δ_H δ + 2⟨∇ ln w̃, ∇δ⟩ + (w̃⁴/8)[R_t ((1+δ)⁵ − (1+δ)) − D (1+δ)]`
//!
//! where `D = R_g̃ − R_t` is the gluing defect. Each Dirichlet problem
//! (`δ = 0` on the geodesic sphere of radius `ρ_i` about the midpoint) is
//! solved by damped Newton with a banded direct solve; an increasing
//! sequence of radii exhausts the box.

use crate::banded::{BandLu, BandMatrix};
use crate::curvature::{derivs_o4, inner, quintic_excess, Stencil2D};
use crate::error::{ConfigError, Error, Result};
use crate::gluing::{ConformalField, Zone};
use crate::hypgeom::axial_distance;
use serde::{Deserialize, Serialize};

/// `5^{-1/4}`: the composite factor must stay above this.
pub const COERCIVITY_FLOOR: f64 = 0.668_740_304_976_422;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSettings {
    /// Exhaustion radii about the midpoint; empty means `3τ, 3τ+2, …` up to
    /// the grid radius.
    pub radii: Vec<f64>,
    /// Bound on `max |F_i| / s_i`, where `s_i = min(1, e^{−3(ρ_i − ρ_s)})`
    /// tightens the far field (`ρ_s` is the outer gluing radius).
    pub newton_tol: f64,
    pub max_steps: usize,
    pub cauchy_tol: f64,
    /// Smallest damping factor tried before giving up.
    pub damping_floor: f64,
}

impl Default for SolveSettings {
    fn default() -> Self {
        SolveSettings { radii: Vec::new(), newton_tol: 1e-9, max_steps: 12, cauchy_tol: 1e-8, damping_floor: 1.0 / 64.0 }
    }
}

impl SolveSettings {
    /// Radii for separation `τ` on a grid of radius `rho_max`.
    pub fn radii_for(&self, tau: f64, rho_max: f64) -> Result<Vec<f64>> {
        let radii = if self.radii.is_empty() {
            let mut v = Vec::new();
            let mut r = 3.0 * tau;
            while r < rho_max + 1e-9 {
                v.push(r.min(rho_max));
                r += 2.0;
            }
            if v.last().is_some_and(|&l| l < rho_max - 1e-9) {
                v.push(rho_max);
            }
            v
        } else {
            self.radii.clone()
        };
        if radii.is_empty() {
            return Err(ConfigError::GridTooSmall { rho_max, needed: 3.0 * tau }.into());
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(ConfigError::RadiiNotIncreasing(radii).into());
        }
        if radii[0] < 3.0 * tau - 1e-12 {
            return Err(ConfigError::FirstRadiusTooSmall { first: radii[0], needed: 3.0 * tau }.into());
        }
        let last = radii[radii.len() - 1];
        if last > rho_max + 1e-12 {
            return Err(ConfigError::RadiusBeyondGrid { radius: last, rho_max }.into());
        }
        Ok(radii)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: &str| Err(ConfigError::Invalid(s.to_string()).into());
        if !(self.newton_tol > 0.0) {
            return bad("newton_tol must be positive");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1");
        }
        if !(self.cauchy_tol > 0.0) {
            return bad("cauchy_tol must be positive");
        }
        if !(self.damping_floor > 0.0 && self.damping_floor <= 1.0) {
            return bad("damping_floor must lie in (0, 1]");
        }
        Ok(())
    }
}

/// Per-node coefficients of `F`.
#[derive(Debug, Clone, Copy)]
struct Coeff {
    /// `2 ∂z ln w̃ / cosh² r`, `2 ∂r ln w̃`.
    bz: f64,
    br: f64,
    /// `w̃⁴ R_t / 8`, `w̃⁴ D / 8`.
    a_t: f64,
    a_d: f64,
    /// Residual scale `s_i`.
    scale: f64,
}

/// Discretized `F` on the whole grid; rows exist only at interior nodes.
pub struct Operator<'a> {
    field: &'a ConformalField,
    stencils: Vec<Option<Stencil2D>>,
    coeff: Vec<Coeff>,
    /// Extra source term per node, for manufactured solutions.
    pub source: Option<Vec<f64>>,
}

impl<'a> Operator<'a> {
    pub fn new(field: &'a ConformalField) -> Self {
        let g = &field.grid;
        let cfg = &field.metric.cfg;
        let rho_s = cfg.centers_z.iter().fold(0.0f64, |m, z| m.max(z.abs())) + cfg.tau + 2.0;
        let mut stencils = Vec::with_capacity(g.len());
        let mut coeff = Vec::with_capacity(g.len());
        for iz in 0..g.nz() {
            for ir in 0..g.nr() {
                let i = g.idx(iz, ir);
                stencils.push(Stencil2D::at(g, iz, ir));
                let b = &field.bg[i];
                let r = g.r[ir];
                let w = b.w();
                let w4 = w.powi(4) / 8.0;
                coeff.push(Coeff {
                    bz: 2.0 * b.grad[0] / (w * r.cosh().powi(2)),
                    br: 2.0 * b.grad[1] / w,
                    a_t: w4 * (b.target_plus6 - 6.0),
                    a_d: w4 * b.defect,
                    scale: (-3.0 * (g.rho_mid(i) - rho_s)).exp().min(1.0),
                });
            }
        }
        Operator { field, stencils, coeff, source: None }
    }

    /// `F_i(δ)`; NaN at boundary nodes.
    pub fn residual_at(&self, delta: &[f64], i: usize) -> f64 {
        let Some(s) = &self.stencils[i] else { return f64::NAN };
        let c = &self.coeff[i];
        let (lap, dz, dr) = s.apply(delta);
        let d = delta[i];
        let mut f = lap + c.bz * dz + c.br * dr + c.a_t * quintic_excess(d) - c.a_d * (1.0 + d);
        if let Some(src) = &self.source {
            f += src[i];
        }
        f
    }

    pub fn residual(&self, delta: &[f64]) -> Vec<f64> {
        (0..delta.len()).map(|i| self.residual_at(delta, i)).collect()
    }

    pub fn scale(&self, i: usize) -> f64 {
        self.coeff[i].scale
    }
}

/// Nodes strictly inside the geodesic ball of radius `radius` about the
/// midpoint, excluding the box boundary.
fn active_nodes(op: &Operator, radius: f64) -> Vec<usize> {
    let g = &op.field.grid;
    (0..g.len()).filter(|&i| op.stencils[i].is_some() && g.rho_mid(i) < radius).collect()
}

struct Dirichlet<'a, 'b> {
    op: &'b Operator<'a>,
    active: Vec<usize>,
    /// Grid index → position in `active`, or `usize::MAX`.
    pos: Vec<usize>,
    band: usize,
}

impl<'a, 'b> Dirichlet<'a, 'b> {
    fn new(op: &'b Operator<'a>, radius: f64) -> Self {
        let active = active_nodes(op, radius);
        let mut pos = vec![usize::MAX; op.field.grid.len()];
        for (k, &i) in active.iter().enumerate() {
            pos[i] = k;
        }
        let mut band = 0;
        for (k, &i) in active.iter().enumerate() {
            for &j in &op.stencils[i].as_ref().unwrap().idx[1..] {
                if pos[j] != usize::MAX {
                    band = band.max(pos[j].abs_diff(k));
                }
            }
        }
        Dirichlet { op, active, pos, band }
    }

    fn jacobian(&self, delta: &[f64]) -> Result<BandLu> {
        let n = self.active.len();
        let mut a = BandMatrix::new(n, self.band, self.band);
        for (k, &i) in self.active.iter().enumerate() {
            let s = self.op.stencils[i].as_ref().unwrap();
            let c = &self.op.coeff[i];
            let d = delta[i];
            let mut diag = c.a_t * (5.0 * (1.0 + d).powi(4) - 1.0) - c.a_d;
            for m in 1..5 {
                diag -= s.lap[m];
                let v = s.lap[m] + c.bz * s.dz[m] + c.br * s.dr[m];
                let j = self.pos[s.idx[m]];
                if j != usize::MAX {
                    a.add(k, j, v);
                }
            }
            a.add(k, k, diag);
        }
        a.factor()
    }

    /// `max |F_i| / s_i` over active nodes, and the raw residual.
    fn residual(&self, delta: &[f64]) -> (f64, Vec<f64>) {
        let mut m = 0.0f64;
        let f: Vec<f64> = self
            .active
            .iter()
            .map(|&i| {
                let v = self.op.residual_at(delta, i);
                m = m.max(v.abs() / self.op.scale(i));
                v
            })
            .collect();
        (m, f)
    }

    fn min_w(&self, delta: &[f64]) -> f64 {
        self.active.iter().fold(f64::INFINITY, |m, &i| m.min(self.op.field.bg[i].w() * (1.0 + delta[i])))
    }
}

/// Outcome of one Dirichlet solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletSolve {
    pub radius: f64,
    pub active_nodes: usize,
    pub steps: usize,
    /// Scaled residual before each step and after the last.
    pub trace: Vec<f64>,
}

/// Solves `F(δ) = 0` inside `B(radius)` with `δ = 0` outside, starting from
/// `delta` (which is overwritten). The Jacobian is refactored only when the
/// contraction of a step is poor.
pub fn solve_dirichlet(op: &Operator, radius: f64, delta: &mut [f64], settings: &SolveSettings) -> Result<DirichletSolve> {
    let dir = Dirichlet::new(op, radius);
    for (d, &pos) in delta.iter_mut().zip(&dir.pos) {
        if pos == usize::MAX {
            *d = 0.0;
        }
    }
    let mut out = DirichletSolve { radius, active_nodes: dir.active.len(), steps: 0, trace: Vec::new() };
    if dir.active.is_empty() {
        return Ok(out);
    }
    let (mut res, mut f) = dir.residual(delta);
    out.trace.push(res);
    let mut lu: Option<BandLu> = None;
    let mut trial = delta.to_vec();
    while res > settings.newton_tol {
        if out.steps == settings.max_steps {
            return Err(Error::NewtonDivergence { radius, trace: out.trace });
        }
        if lu.is_none() {
            lu = Some(dir.jacobian(delta)?);
        }
        let mut step = f.clone();
        lu.as_ref().unwrap().solve(&mut step);
        let mut lambda = 1.0;
        loop {
            for (k, &i) in dir.active.iter().enumerate() {
                trial[i] = delta[i] - lambda * step[k];
            }
            if dir.min_w(&trial) > COERCIVITY_FLOOR {
                let (r2, f2) = dir.residual(&trial);
                if r2 < res {
                    if r2 > 0.25 * res {
                        // slow contraction: refresh the Jacobian next time
                        lu = None;
                    }
                    res = r2;
                    f = f2;
                    delta.copy_from_slice(&trial);
                    break;
                }
            }
            lambda *= 0.5;
            lu = None;
            if lambda < settings.damping_floor {
                out.trace.push(res);
                return Err(Error::NewtonDivergence { radius, trace: out.trace });
            }
        }
        out.steps += 1;
        out.trace.push(res);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    /// Composite field `w = w̃ u` (provenance solved).
    pub field: ConformalField,
    pub solves: Vec<DirichletSolve>,
    /// `sup_{B(ρ_{k−1})} |w_k − w_{k−1}|` for `k ≥ 1`.
    pub diffs: Vec<f64>,
    /// `sup |u − 1|`.
    pub sup_dev: f64,
    pub min_w: f64,
}

impl SolveResult {
    pub fn final_residual(&self) -> f64 {
        self.solves.last().and_then(|s| s.trace.last().copied()).unwrap_or(0.0)
    }

    pub fn newton_steps(&self) -> usize {
        self.solves.iter().map(|s| s.steps).sum()
    }
}

/// Solves on each exhaustion radius in turn, each warm-started from the
/// previous solution, until successive solutions agree to the Cauchy
/// tolerance on the smaller ball.
pub fn exhaust(glued: &ConformalField, settings: &SolveSettings) -> Result<SolveResult> {
    exhaust_with_source(glued, settings, None)
}

pub fn exhaust_with_source(glued: &ConformalField, settings: &SolveSettings, source: Option<Vec<f64>>) -> Result<SolveResult> {
    settings.validate()?;
    let g = &glued.grid;
    let radii = settings.radii_for(glued.metric.cfg.tau, g.rho_max)?;
    let mut op = Operator::new(glued);
    op.source = source;
    let mut delta = vec![0.0; g.len()];
    let mut prev: Option<(f64, Vec<f64>)> = None;
    let mut solves = Vec::new();
    let mut diffs = Vec::new();
    let mut converged = false;
    for &radius in &radii {
        let s = solve_dirichlet(&op, radius, &mut delta, settings)?;
        solves.push(s);
        if let Some((r0, d0)) = &prev {
            let mut m = 0.0f64;
            for i in 0..g.len() {
                if g.rho_mid(i) < *r0 {
                    m = m.max((glued.bg[i].w() * (delta[i] - d0[i])).abs());
                }
            }
            diffs.push(m);
            if m < settings.cauchy_tol {
                converged = true;
            }
        }
        prev = Some((radius, delta.clone()));
    }
    if radii.len() > 1 && !converged {
        return Err(Error::Exhaustion { diffs });
    }
    let radius = radii[radii.len() - 1];
    let field = glued.with_delta(delta, radius);
    let sup_dev = field.delta.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let min_w = (0..g.len()).fold(f64::INFINITY, |m, i| m.min(field.w_node(i)));
    Ok(SolveResult { field, solves, diffs, sup_dev, min_w })
}

/// Residual of the conformal equation in its original form,
/// `Δ_g̃ u − R_g̃ u / 8 + R_t u⁵ / 8`, with `R_g̃` from the analytic
/// background. Equals `F / w̃⁴` node by node.
pub fn residual_u_form(field: &ConformalField) -> Vec<f64> {
    let g = &field.grid;
    (0..g.len())
        .map(|i| {
            let Some(s) = Stencil2D::at(g, i / g.nr(), i % g.nr()) else { return f64::NAN };
            let b = &field.bg[i];
            let (lap, dz, dr) = s.apply(&field.delta);
            let w = b.w();
            let r = g.r[i % g.nr()];
            let u = 1.0 + field.delta[i];
            let lap_g = (lap + 2.0 * inner(r, b.grad, [dz, dr]) / w) / w.powi(4);
            let rg = b.r_plus6 - 6.0;
            let rt = b.target_plus6 - 6.0;
            lap_g - rg * u / 8.0 + rt * u.powi(5) / 8.0
        })
        .collect()
}

/// Composite residual `Δ_H w + 3w/4 + R_t w⁵/8` with the second-order
/// stencil applied to the node values of `w`.
pub fn residual_w_form(field: &ConformalField) -> Vec<f64> {
    let g = &field.grid;
    let dev: Vec<f64> = (0..g.len()).map(|i| field.dev_node(i)).collect();
    (0..g.len())
        .map(|i| {
            let Some(s) = Stencil2D::at(g, i / g.nr(), i % g.nr()) else { return f64::NAN };
            let w = 1.0 + dev[i];
            let rt = field.bg[i].target_plus6 - 6.0;
            s.apply(&dev).0 + 0.75 * w + rt * w.powi(5) / 8.0
        })
        .collect()
}

/// Truncation of the second-order stencil on the background,
/// `|u (Δ_h w̃ − Δ w̃)|`, the size of the discrepancy expected between the
/// w-form and `w̃⁵` times the original-form residual.
pub fn background_truncation(field: &ConformalField) -> Vec<f64> {
    let g = &field.grid;
    let dev: Vec<f64> = field.bg.iter().map(|b| b.dev).collect();
    (0..g.len())
        .map(|i| match Stencil2D::at(g, i / g.nr(), i % g.nr()) {
            None => f64::NAN,
            Some(s) => ((1.0 + field.delta[i]) * (s.apply(&dev).0 - field.bg[i].lap)).abs(),
        })
        .collect()
}

/// `R + 6` of the solved metric `(w̃ u)⁴ g_H`: analytic background
/// curvature plus fourth-order differences of `u − 1`. NaN within two nodes
/// of the box boundary.
pub fn solved_curvature(field: &ConformalField) -> Vec<f64> {
    let g = &field.grid;
    (0..g.len())
        .map(|i| {
            let (iz, ir) = (i / g.nr(), i % g.nr());
            let Some((lap, dz, dr)) = derivs_o4(g, &field.delta, iz, ir) else { return f64::NAN };
            let b = &field.bg[i];
            let w = b.w();
            let u = 1.0 + field.delta[i];
            let lap_g = (lap + 2.0 * inner(g.r[ir], b.grad, [dz, dr]) / w) / w.powi(4);
            // R_w = u⁻⁵ (R_g̃ u − 8 Δ_g̃ u)
            let rg6 = b.r_plus6;
            (rg6 * u - 8.0 * lap_g + 6.0 * quintic_excess(field.delta[i])) / u.powi(5)
        })
        .collect()
}

/// Largest `|R + 6|` of the solved metric over nodes inside
/// `B(radius)` about the midpoint and outside every seed core.
pub fn max_curvature_defect(field: &ConformalField, radius: f64) -> f64 {
    let r6 = solved_curvature(field);
    let g = &field.grid;
    let mut m = 0.0f64;
    for (i, v) in r6.iter().enumerate() {
        let (z, r) = g.coords(i);
        if !v.is_finite() || g.rho_mid(i) >= radius || matches!(field.metric.zone(z, r), Zone::Core(_)) {
            continue;
        }
        m = m.max(v.abs());
    }
    m
}

/// `−F` of a prescribed `δ*(z, r)` given as `(δ*, ∇δ*, Δδ*)`, for
/// manufactured solutions: adding it as a source makes `δ*` the continuum
/// solution.
pub fn manufactured_source<F: Fn(f64, f64) -> (f64, [f64; 2], f64)>(field: &ConformalField, f: F) -> Vec<f64> {
    let g = &field.grid;
    (0..g.len())
        .map(|i| {
            let (z, r) = g.coords(i);
            let (d, grad, lap) = f(z, r);
            let b = &field.bg[i];
            let w = b.w();
            let w4 = w.powi(4) / 8.0;
            let cont = lap + 2.0 * inner(r, b.grad, grad) / w + w4 * ((b.target_plus6 - 6.0) * quintic_excess(d) - b.defect * (1.0 + d));
            -cont
        })
        .collect()
}

/// Radial barrier `f± = 1 ± λ e^{−3ρ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Barrier {
    pub lambda: f64,
    pub rho_bar: f64,
}

impl Barrier {
    /// The default `λ = e^{3ρ̄}`.
    pub fn new(rho_bar: f64) -> Self {
        Barrier { lambda: (3.0 * rho_bar).exp(), rho_bar }
    }

    /// `(f, f', f'')` of `f₊` (`upper`) or `f₋`.
    pub fn eval(&self, rho: f64, upper: bool) -> (f64, f64, f64) {
        let s = if upper { 1.0 } else { -1.0 };
        let x = self.lambda * (-3.0 * rho).exp();
        (1.0 + s * x, -3.0 * s * x, 9.0 * s * x)
    }

    /// `L(f) = Δ_H f − (3/4) f (f⁴ − 1)` for the radial barrier. The linear
    /// part `−6(±x)(coth ρ − 1)` is formed directly since it is far below
    /// the size of its terms.
    pub fn operator(&self, rho: f64, upper: bool) -> f64 {
        let y = if upper { 1.0 } else { -1.0 } * self.lambda * (-3.0 * rho).exp();
        let coth_m1 = 2.0 / (2.0 * rho).exp_m1();
        -6.0 * y * coth_m1 - 0.75 * y * y * (10.0 + y * (10.0 + y * (5.0 + y)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierReport {
    pub barrier: Barrier,
    pub holds: bool,
    pub violations: usize,
    pub checked: usize,
    /// Smallest `λe^{−3ρ} − |v − 1|` and where (`ρ`, node).
    pub worst_margin: f64,
    pub worst_rho: f64,
    pub worst_node: usize,
    /// `L(f₋) > 0` and `L(f₊) < 0` on the sampled `[ρ̄, ρ_max]`.
    pub sub_ok: bool,
    pub super_ok: bool,
    /// Smallest `L(f₋)` and where.
    pub sub_min: f64,
    pub sub_min_rho: f64,
    /// Largest `L(f₊)`.
    pub super_max: f64,
}

/// Checks `|v − 1| ≤ λ e^{−3ρ}` at every node with `ρ̄ ≤ ρ < rho_max`, `ρ`
/// measured from center 0, and samples the barrier inequalities.
pub fn barrier_check(field: &ConformalField, barrier: Barrier, rho_max: f64) -> BarrierReport {
    let g = &field.grid;
    let zo = field.metric.cfg.centers_z[0];
    let mut rep = BarrierReport {
        barrier,
        holds: true,
        violations: 0,
        checked: 0,
        worst_margin: f64::INFINITY,
        worst_rho: f64::NAN,
        worst_node: 0,
        sub_ok: true,
        super_ok: true,
        sub_min: f64::INFINITY,
        sub_min_rho: f64::NAN,
        super_max: f64::NEG_INFINITY,
    };
    for i in 0..g.len() {
        let (z, r) = g.coords(i);
        let rho = axial_distance(z, r, zo);
        if rho < barrier.rho_bar || rho >= rho_max {
            continue;
        }
        rep.checked += 1;
        let margin = barrier.lambda * (-3.0 * rho).exp() - field.delta[i].abs();
        if margin < 0.0 {
            rep.violations += 1;
        }
        if margin < rep.worst_margin {
            rep.worst_margin = margin;
            rep.worst_rho = rho;
            rep.worst_node = i;
        }
    }
    let n = 2000;
    for k in 0..=n {
        let rho = barrier.rho_bar + (rho_max - barrier.rho_bar) * k as f64 / n as f64;
        let lm = barrier.operator(rho, false);
        if lm < rep.sub_min {
            rep.sub_min = lm;
            rep.sub_min_rho = rho;
        }
        rep.sub_ok &= lm > 0.0;
        let lp = barrier.operator(rho, true);
        rep.super_max = rep.super_max.max(lp);
        rep.super_ok &= lp < 0.0;
    }
    rep.holds = rep.violations == 0;
    rep
}

/// `(coth ρ − 1) e^{−3ρ} > 2 e^{−5ρ}` at `n + 1` samples of `[a, b]`.
/// Returns the smallest `ln(lhs / rhs)`; the ratio is `1 + O(e^{−2ρ})`, so
/// it is evaluated as `−ln(1 − e^{−2ρ})` to stay resolvable in doubles.
pub fn coth_inequality(a: f64, b: f64, n: usize) -> f64 {
    (0..=n)
        .map(|k| {
            let rho = a + (b - a) * k as f64 / n as f64;
            // coth ρ − 1 = 2 e^{−2ρ} / (1 − e^{−2ρ})
            -(-(-2.0 * rho).exp()).ln_1p()
        })
        .fold(f64::INFINITY, f64::min)
}
