//! Multi-center glued conformal factors `w̃` and their curvature defect.
//!
//! Centers sit on one geodesic, placed at axial positions `z_k` spaced `2τ`
//! apart and symmetric about the midpoint `z = 0`. The glued factor is
//! evaluated analytically from the seed profiles, together with its
//! gradient, hyperbolic Laplacian and scalar curvature.
//!
//! Two forms are available. `ThreeZone` (two centers) keeps the ambient seed
//! `φ_o` and inserts `φ_p` inside `B_p(τ+1)`, blending with the cutoff on
//! `B_p(τ+2)∖B_p(τ+1)`. `Superposition` uses `w̃ = 1 + Σ_k (φ_k(ρ_k) − 1)`.
//!
//! The curvature target of the deformation is `R_t = −6` except where the
//! glued factor is locally a single seed whose own core curvature is not
//! `−6`; the defect `D = R_g̃ − R_t` is what drives `u − 1`.

use crate::curvature::{defect_law, inner, radial_laplacian, rho_gradient, seed_excess};
use crate::error::{ConfigError, Result};
use crate::grid::AxialGrid;
use crate::hypgeom::{axial_distance, axial_to_polar, polar_to_axial, AxialFrame, HPoint};
use crate::seedprofile::{smoothstep5, RadialProfile};
use serde::{Deserialize, Serialize};

/// Cutoff `η(s)`: 1 for `s ≤ a`, 0 for `s ≥ b`, quintic smoothstep between.
/// Returns `(η, η', η'')`.
pub fn cutoff_eta(s: f64, a: f64, b: f64) -> (f64, f64, f64) {
    let l = b - a;
    let (v, d1, d2) = smoothstep5((s - a) / l);
    (1.0 - v, -d1 / l, -d2 / (l * l))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GlueMode {
    ThreeZone,
    Superposition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlueConfig {
    pub tau: f64,
    pub centers: Vec<HPoint>,
    /// Axial position of each center.
    pub centers_z: Vec<f64>,
    pub profiles: Vec<RadialProfile>,
    pub deltas: Vec<f64>,
    pub mode: GlueMode,
}

impl GlueConfig {
    /// Collinear centers `2τ` apart. Center 0 is `o = (0, 0, 1)`; for two
    /// centers, center 1 is `p = (0, 0, e^{2τ})`.
    pub fn collinear(tau: f64, profiles: Vec<RadialProfile>, deltas: Vec<f64>, mode: GlueMode) -> Result<Self> {
        let k = profiles.len();
        if k == 0 {
            return Err(ConfigError::NoCenters.into());
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(ConfigError::NonPositiveTau(tau).into());
        }
        if deltas.len() != k {
            return Err(ConfigError::ProfileCount { profiles: k, centers: deltas.len() }.into());
        }
        let half = (k as f64 - 1.0) * tau;
        let centers_z: Vec<f64> = (0..k).map(|i| 2.0 * tau * i as f64 - half).collect();
        let frame = AxialFrame { z0: half };
        let centers = centers_z.iter().map(|&z| frame.axis_point(z)).collect();
        let cfg = GlueConfig { tau, centers, centers_z, profiles, deltas, mode };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn frame(&self) -> AxialFrame {
        AxialFrame { z0: -self.centers_z[0] }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.profiles.len();
        if k == 0 {
            return Err(ConfigError::NoCenters.into());
        }
        if !(self.tau > 0.0) {
            return Err(ConfigError::NonPositiveTau(self.tau).into());
        }
        if self.deltas.len() != k || self.centers_z.len() != k {
            return Err(ConfigError::ProfileCount { profiles: k, centers: self.centers_z.len() }.into());
        }
        for i in 0..k {
            for j in i + 1..k {
                let sep = (self.centers_z[j] - self.centers_z[i]).abs();
                let sum = self.deltas[i] + self.deltas[j];
                if !(sep > sum) {
                    return Err(ConfigError::CentersTooClose { i, j, sep, sum }.into());
                }
            }
        }
        if self.mode == GlueMode::ThreeZone {
            if k != 2 {
                return Err(ConfigError::Invalid(format!("three-zone gluing needs exactly 2 centers, got {k}")).into());
            }
            // o's core must stay outside the annulus around p
            let (inner, outer) = self.annulus();
            let dist = 2.0 * self.tau;
            let delta = self.deltas[0];
            if !(dist - outer > delta) || !(self.deltas[1] < inner) {
                return Err(ConfigError::AnnulusOverlapsCore { center: 0, delta, around: 1, inner, outer, dist }.into());
            }
        }
        Ok(())
    }

    /// Transition radii `(τ + 1, τ + 2)` of the cutoff about `p`.
    pub fn annulus(&self) -> (f64, f64) {
        (self.tau + 1.0, self.tau + 2.0)
    }

    /// The conservative margin `2τ / (10 (δ_o + δ_p))`; above 1 when the
    /// stricter separation holds.
    pub fn separation_margin(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.deltas.len() {
            for j in i + 1..self.deltas.len() {
                let sep = (self.centers_z[j] - self.centers_z[i]).abs();
                m = m.min(sep / (10.0 * (self.deltas[i] + self.deltas[j])));
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "center")]
pub enum Zone {
    /// Inside `B_k(δ_k)`.
    Core(usize),
    /// Locally a single seed outside its core.
    Pure(usize),
    /// The cutoff annulus of the three-zone form.
    Annulus,
    /// Superposed seeds outside all cores.
    Overlap,
}

/// Analytic data of the glued factor at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Background {
    /// `w̃ − 1`.
    pub dev: f64,
    /// `(∂z w̃, ∂r w̃)`.
    pub grad: [f64; 2],
    /// `Δ_H w̃`.
    pub lap: f64,
    /// `R_g̃ + 6`.
    pub r_plus6: f64,
    /// `R_t + 6`.
    pub target_plus6: f64,
    /// `D = R_g̃ − R_t`.
    pub defect: f64,
}

impl Background {
    pub fn w(&self) -> f64 {
        1.0 + self.dev
    }
}

/// Radial seed data at one point: `(w − 1, w', Δw, ∇ρ)`.
struct Radial {
    rho: f64,
    dev: f64,
    d1: f64,
    lap: f64,
    grad_rho: [f64; 2],
}

/// The glued factor as an analytic function of `(z, r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GluedMetric {
    pub cfg: GlueConfig,
}

impl GluedMetric {
    pub fn new(cfg: GlueConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(GluedMetric { cfg })
    }

    fn radial(&self, k: usize, z: f64, r: f64) -> Radial {
        let zc = self.cfg.centers_z[k];
        let rho = axial_distance(z, r, zc);
        let (d, d1, d2) = self.cfg.profiles[k].eval_dev(rho);
        Radial { rho, dev: d, d1, lap: radial_laplacian(rho, d1, d2), grad_rho: rho_gradient(z, r, zc, rho) }
    }

    fn excess(&self, k: usize, s: &Radial) -> f64 {
        if s.rho < self.cfg.deltas[k] {
            seed_excess(&self.cfg.profiles[k], s.rho)
        } else {
            0.0
        }
    }

    pub fn zone(&self, z: f64, r: f64) -> Zone {
        let dists: Vec<f64> = self.cfg.centers_z.iter().map(|&c| axial_distance(z, r, c)).collect();
        if let Some(k) = (0..dists.len()).find(|&k| dists[k] < self.cfg.deltas[k]) {
            return Zone::Core(k);
        }
        match self.cfg.mode {
            GlueMode::Superposition if dists.len() > 1 => Zone::Overlap,
            GlueMode::Superposition => Zone::Pure(0),
            GlueMode::ThreeZone => {
                let (a, b) = self.cfg.annulus();
                if dists[1] <= a {
                    Zone::Pure(1)
                } else if dists[1] >= b {
                    Zone::Pure(0)
                } else {
                    Zone::Annulus
                }
            }
        }
    }

    /// Value and gradient only.
    pub fn eval_w(&self, z: f64, r: f64) -> (f64, [f64; 2]) {
        let b = self.eval_inner(z, r, false);
        (b.dev, b.grad)
    }

    pub fn at(&self, z: f64, r: f64) -> Background {
        self.eval_inner(z, r, true)
    }

    fn eval_inner(&self, z: f64, r: f64, full: bool) -> Background {
        let cfg = &self.cfg;
        match cfg.mode {
            GlueMode::Superposition => {
                let mut out = Background::default();
                let mut excess = 0.0;
                for k in 0..cfg.profiles.len() {
                    let s = self.radial(k, z, r);
                    out.dev += s.dev;
                    out.grad[0] += s.d1 * s.grad_rho[0];
                    out.grad[1] += s.d1 * s.grad_rho[1];
                    out.lap += s.lap;
                    if full {
                        excess += self.excess(k, &s);
                    }
                }
                if full {
                    out.r_plus6 = defect_law(out.dev, out.lap);
                    out.target_plus6 = excess;
                    out.defect = out.r_plus6 - excess;
                }
                out
            }
            GlueMode::ThreeZone => {
                let (a, b) = cfg.annulus();
                let rho_p = axial_distance(z, r, cfg.centers_z[1]);
                let pure = |k: usize| {
                    let s = self.radial(k, z, r);
                    let mut out = Background {
                        dev: s.dev,
                        grad: [s.d1 * s.grad_rho[0], s.d1 * s.grad_rho[1]],
                        lap: s.lap,
                        ..Background::default()
                    };
                    if full {
                        out.r_plus6 = defect_law(s.dev, s.lap);
                        out.target_plus6 = out.r_plus6;
                    }
                    out
                };
                if rho_p <= a {
                    return pure(1);
                }
                if rho_p >= b {
                    return pure(0);
                }
                let sa = self.radial(1, z, r);
                let sb = self.radial(0, z, r);
                let (eta, e1, e2) = cutoff_eta(sa.rho, a, b);
                let diff = sa.dev - sb.dev;
                let dev = eta * sa.dev + (1.0 - eta) * sb.dev;
                let ca = eta * sa.d1 + e1 * diff;
                let cb = (1.0 - eta) * sb.d1;
                let grad = [ca * sa.grad_rho[0] + cb * sb.grad_rho[0], ca * sa.grad_rho[1] + cb * sb.grad_rho[1]];
                let lap_eta = radial_laplacian(sa.rho, e1, e2);
                let cross = inner(r, sa.grad_rho, sb.grad_rho);
                let lap = eta * sa.lap
                    + (1.0 - eta) * sb.lap
                    + lap_eta * diff
                    + 2.0 * e1 * (sa.d1 - sb.d1 * cross);
                let mut out = Background { dev, grad, lap, ..Background::default() };
                if full {
                    out.r_plus6 = defect_law(dev, lap);
                    out.defect = out.r_plus6;
                }
                out
            }
        }
    }
}

/// `w̃` sampled on a grid together with the correction `u − 1`.
#[derive(Debug, Clone)]
pub struct ConformalField {
    pub grid: AxialGrid,
    pub metric: GluedMetric,
    /// Background data per node.
    pub bg: Vec<Background>,
    /// `u − 1` per node (zero for a glued field).
    pub delta: Vec<f64>,
    /// `(u − 1) e^{3ρ_mid}` per node, the interpolated quantity.
    scaled: Vec<f64>,
    pub provenance: Provenance,
    /// Radius of the last Dirichlet ball; beyond it `u − 1` is continued
    /// by its `e^{−3ρ}` tail.
    pub solved_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Glued,
    Solved,
}

impl ConformalField {
    pub fn glued(metric: GluedMetric, grid: AxialGrid) -> Self {
        let bg: Vec<Background> = (0..grid.len())
            .map(|i| {
                let (z, r) = grid.coords(i);
                metric.at(z, r)
            })
            .collect();
        let n = grid.len();
        let rho = grid.rho_max;
        ConformalField { grid, metric, bg, delta: vec![0.0; n], scaled: vec![0.0; n], provenance: Provenance::Glued, solved_radius: rho }
    }

    /// Same background with `u − 1 = delta`.
    pub fn with_delta(&self, delta: Vec<f64>, solved_radius: f64) -> Self {
        let scaled = delta.iter().enumerate().map(|(i, d)| d * (3.0 * self.grid.rho_mid(i)).exp()).collect();
        ConformalField {
            grid: self.grid.clone(),
            metric: self.metric.clone(),
            bg: self.bg.clone(),
            delta,
            scaled,
            provenance: Provenance::Solved,
            solved_radius,
        }
    }

    pub fn w_node(&self, i: usize) -> f64 {
        self.bg[i].w() * (1.0 + self.delta[i])
    }

    /// `(w − 1)` at node `i` without cancellation.
    pub fn dev_node(&self, i: usize) -> f64 {
        let d = self.bg[i].dev;
        d + self.delta[i] * (1.0 + d)
    }

    /// Interpolated `(u − 1, ∂z, ∂r)`.
    pub fn delta_at(&self, z: f64, r: f64) -> (f64, f64, f64) {
        if self.provenance == Provenance::Glued {
            return (0.0, 0.0, 0.0);
        }
        let rho = axial_distance(z, r, 0.0);
        let edge = self.solved_radius - 1.0;
        if rho > edge {
            // continue along the ray from the midpoint with the e^{−3ρ} tail
            let (zb, rb) = polar_to_axial(edge, axial_to_polar(z, r, 0.0).1, 0.0);
            let (g, _, _) = self.grid.interpolate(&self.scaled, zb, rb);
            let d = g * (-3.0 * rho).exp();
            let gr = rho_gradient(z, r, 0.0, rho);
            return (d, -3.0 * d * gr[0], -3.0 * d * gr[1]);
        }
        let (g, gz, gr) = self.grid.interpolate(&self.scaled, z, r);
        let e = (-3.0 * rho).exp();
        let grad = rho_gradient(z, r, 0.0, rho);
        (g * e, (gz - 3.0 * g * grad[0]) * e, (gr - 3.0 * g * grad[1]) * e)
    }

    /// Composite `(w − 1, ∂z w, ∂r w)` with `w = w̃ u`.
    pub fn w_at(&self, z: f64, r: f64) -> (f64, [f64; 2]) {
        let (d, g) = self.metric.eval_w(z, r);
        let (u, uz, ur) = self.delta_at(z, r);
        let w = 1.0 + d;
        (d + u * w, [g[0] * (1.0 + u) + w * uz, g[1] * (1.0 + u) + w * ur])
    }
}

/// Samples the glued factor on `grid`.
pub fn glue(cfg: &GlueConfig, grid: AxialGrid) -> Result<ConformalField> {
    Ok(ConformalField::glued(GluedMetric::new(cfg.clone())?, grid))
}

/// Per-zone maxima of `|R + 6|`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DefectSummary {
    pub annulus: f64,
    pub overlap: f64,
    pub pure: f64,
    pub cores: Vec<f64>,
    /// Largest `|D|` (defect relative to the target) anywhere.
    pub glue_defect: f64,
}

/// `R + 6` from the discrete Laplacian of the sampled `w̃` (NaN on the box
/// boundary), with per-zone maxima.
pub fn curvature_defect(field: &ConformalField) -> (Vec<f64>, DefectSummary) {
    let grid = &field.grid;
    let dev: Vec<f64> = (0..grid.len()).map(|i| field.dev_node(i)).collect();
    let lap = crate::curvature::laplacian_h3(grid, &dev);
    let r6: Vec<f64> = dev.iter().zip(&lap).map(|(&d, &l)| defect_law(d, l)).collect();
    let mut s = DefectSummary { cores: vec![0.0; field.metric.cfg.profiles.len()], ..Default::default() };
    for (i, v) in r6.iter().enumerate() {
        if !v.is_finite() {
            continue;
        }
        let (z, r) = grid.coords(i);
        let a = v.abs();
        match field.metric.zone(z, r) {
            Zone::Core(k) => s.cores[k] = s.cores[k].max(a),
            Zone::Pure(_) => s.pure = s.pure.max(a),
            Zone::Annulus => s.annulus = s.annulus.max(a),
            Zone::Overlap => s.overlap = s.overlap.max(a),
        }
        s.glue_defect = s.glue_defect.max(field.bg[i].defect.abs());
    }
    (r6, s)
}

/// Largest analytic `|R_g̃ + 6|` on the cutoff annulus, sampled on
/// `n_rho × n_theta` points in polar coordinates about `p`.
pub fn annulus_defect_max(metric: &GluedMetric, n_rho: usize, n_theta: usize) -> f64 {
    let cfg = &metric.cfg;
    let (a, b) = cfg.annulus();
    let zc = cfg.centers_z[cfg.centers_z.len() - 1];
    let mut m = 0.0f64;
    for i in 0..n_rho {
        let rho = a + (b - a) * (i as f64 + 0.5) / n_rho as f64;
        for j in 0..=n_theta {
            let th = std::f64::consts::PI * j as f64 / n_theta as f64;
            let (z, r) = polar_to_axial(rho, th, zc);
            m = m.max(metric.at(z, r).r_plus6.abs());
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seedprofile::{ads_schw_profile, seed_profile, SeedParams};

    #[test]
    fn cutoff_examples() {
        assert_eq!(cutoff_eta(5.0, 5.0, 6.0).0, 1.0);
        assert_eq!(cutoff_eta(6.0, 5.0, 6.0).0, 0.0);
        assert!((cutoff_eta(5.5, 5.0, 6.0).0 - 0.5).abs() < 1e-15);
        // finite-difference second derivative against the bound
        let (a, b) = (2.0, 2.7);
        let h = 1e-4;
        let mut m = 0.0f64;
        for i in 1..7000 {
            let s = a + (b - a) * i as f64 / 7000.0;
            let d2 = (cutoff_eta(s + h, a, b).0 - 2.0 * cutoff_eta(s, a, b).0 + cutoff_eta(s - h, a, b).0) / (h * h);
            m = m.max(d2.abs());
        }
        assert!(m <= 60.0 / ((b - a) * (b - a)) + 1e-6);
    }

    fn fixture_profile() -> RadialProfile {
        seed_profile(&SeedParams { m: 1.0, cap_depth: 4.7, dip_amp: 0.02, dip_window: (0.6, 0.95), delta: 0.98 }, 40.0)
            .unwrap()
    }

    #[test]
    fn hyperbolic_gluing_is_trivial() {
        let h = RadialProfile::hyperbolic(40.0);
        let cfg = GlueConfig::collinear(4.0, vec![h.clone(), h], vec![0.5, 0.5], GlueMode::ThreeZone).unwrap();
        let g = GluedMetric::new(cfg).unwrap();
        for (z, r) in [(0.0, 0.3), (-1.5, 2.0), (4.0, 0.0)] {
            let b = g.at(z, r);
            assert_eq!((b.dev, b.lap, b.r_plus6, b.defect), (0.0, 0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn three_zone_matches_seeds_off_annulus() {
        let p = fixture_profile();
        let q = ads_schw_profile(1.0, 40.0).unwrap();
        let cfg = GlueConfig::collinear(4.0, vec![q.clone(), p.clone()], vec![0.98, 0.98], GlueMode::ThreeZone).unwrap();
        let g = GluedMetric::new(cfg).unwrap();
        // inside B_p(τ+1)
        let (z, r) = (3.2, 0.4);
        assert_eq!(g.at(z, r).dev, p.eval_dev(axial_distance(z, r, 4.0)).0);
        // outside B_p(τ+2)
        let (z, r) = (-4.5, 0.2);
        assert_eq!(g.at(z, r).dev, q.eval_dev(axial_distance(z, r, -4.0)).0);
        assert_eq!(g.zone(-1.5, 0.0), Zone::Annulus);
    }

    #[test]
    fn single_center_has_no_cutoff() {
        let p = fixture_profile();
        let cfg = GlueConfig::collinear(4.0, vec![p.clone()], vec![0.98], GlueMode::Superposition).unwrap();
        let g = GluedMetric::new(cfg).unwrap();
        let (z, r) = (0.7, 1.1);
        assert_eq!(g.at(z, r).dev, p.eval_dev(axial_distance(z, r, 0.0)).0);
    }

    #[test]
    fn blended_laplacian_matches_differences() {
        let p = fixture_profile();
        let cfg = GlueConfig::collinear(3.0, vec![p.clone(), p], vec![0.98, 0.98], GlueMode::ThreeZone).unwrap();
        let g = GluedMetric::new(cfg).unwrap();
        // a point on the annulus, off axis
        let (z, r) = (-0.9, 0.8);
        assert_eq!(g.zone(z, r), Zone::Annulus);
        let f = |z: f64, r: f64| g.at(z, r).dev;
        let h = 1e-3;
        let fzz = (f(z + h, r) - 2.0 * f(z, r) + f(z - h, r)) / (h * h);
        let frr = (f(z, r + h) - 2.0 * f(z, r) + f(z, r - h)) / (h * h);
        let fz = (f(z + h, r) - f(z - h, r)) / (2.0 * h);
        let fr = (f(z, r + h) - f(z, r - h)) / (2.0 * h);
        let lap = frr + (1.0 / r.tanh() + r.tanh()) * fr + fzz / r.cosh().powi(2);
        let b = g.at(z, r);
        assert!((b.lap - lap).abs() < 1e-6 * b.lap.abs().max(1e-3), "{} vs {lap}", b.lap);
        assert!((b.grad[0] - fz).abs() < 1e-7 && (b.grad[1] - fr).abs() < 1e-7);
    }

    #[test]
    fn rejects_overlap() {
        let p = fixture_profile();
        let e = GlueConfig::collinear(2.5, vec![p.clone(), p.clone()], vec![0.98, 0.98], GlueMode::ThreeZone);
        assert!(matches!(e, Err(crate::Error::Config(ConfigError::AnnulusOverlapsCore { .. }))));
        let e = GlueConfig::collinear(0.9, vec![p.clone(), p], vec![0.98, 0.98], GlueMode::Superposition);
        assert!(matches!(e, Err(crate::Error::Config(ConfigError::CentersTooClose { .. }))));
    }
}
