//! Constant-mean-curvature spheres around each center.
//!
//! Surfaces are found as radial graphs over geodesic spheres: along each
//! direction `θ` from a center the mean curvature `H(ρ, θ)` of the sphere
//! `S(ρ)` is scanned and every crossing of the target is bisected. The
//! crossing that belongs to the construction is the innermost upward one in
//! `(δ/2, δ)`.

use crate::curvature::{inner, mean_curvature, rho_gradient};
use crate::error::{ConfigError, Result};
use crate::gluing::ConformalField;
use crate::hypgeom::polar_to_axial;
use serde::{Deserialize, Serialize};

pub const TARGETS: [f64; 3] = [-2.0, 0.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSettings {
    pub n_theta: usize,
    /// Scanned radii `[rho_min, rho_max]` about each center.
    pub rho_min: f64,
    pub rho_max: f64,
    pub step: f64,
    /// Bisection tolerance in `ρ`.
    pub tol: f64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings { n_theta: 64, rho_min: 0.01, rho_max: 2.0, step: 0.002, tol: 1e-13 }
    }
}

/// Polar angle of sample `j` of `n` (poles included).
pub fn theta_sample(j: usize, n: usize) -> f64 {
    if n == 1 {
        0.0
    } else {
        std::f64::consts::PI * j as f64 / (n - 1) as f64
    }
}

/// `H` of the geodesic sphere of radius `ρ` about center `k`, at polar
/// angle `θ` (from the `+z` axis).
pub fn mean_curvature_at(field: &ConformalField, k: usize, rho: f64, theta: f64) -> f64 {
    let zc = field.metric.cfg.centers_z[k];
    let (z, r) = polar_to_axial(rho, theta, zc);
    let (dev, grad) = field.w_at(z, r);
    let dw = inner(r, grad, rho_gradient(z, r, zc, rho));
    mean_curvature(rho, 1.0 + dev, dw)
}

/// `H(ρ_i, θ_j)` on a product set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HProfile {
    pub center: usize,
    pub rho: Vec<f64>,
    pub theta: Vec<f64>,
    /// `h[j][i]` at `(ρ_i, θ_j)`.
    pub h: Vec<Vec<f64>>,
}

fn check_range(field: &ConformalField, k: usize, a: f64, b: f64) -> Result<()> {
    let cfg = &field.metric.cfg;
    if k >= cfg.centers_z.len() {
        return Err(ConfigError::Invalid(format!("no center {k}")).into());
    }
    let zc = cfg.centers_z[k];
    let reach = zc.abs() + b;
    if !(a > 0.0 && b > a) || reach > field.grid.rho_max {
        return Err(ConfigError::Invalid(format!("radius range [{a}, {b}] about center {k} leaves the grid")).into());
    }
    Ok(())
}

pub fn h_profile(field: &ConformalField, k: usize, rho: &[f64], n_theta: usize) -> Result<HProfile> {
    let (a, b) = rho.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    check_range(field, k, a, b)?;
    let theta: Vec<f64> = (0..n_theta).map(|j| theta_sample(j, n_theta)).collect();
    let h = theta.iter().map(|&t| rho.iter().map(|&r| mean_curvature_at(field, k, r, t)).collect()).collect();
    Ok(HProfile { center: k, rho: rho.to_vec(), theta, h })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub rho: f64,
    /// `H` increases through the target.
    pub upward: bool,
}

/// Result for one center and one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmcRecord {
    pub center: usize,
    pub target: f64,
    /// Every crossing per direction.
    pub crossings: Vec<Vec<Crossing>>,
    /// Selected surface per direction, when found in every direction.
    pub radii: Option<Vec<f64>>,
    pub mean_radius: f64,
    /// `max_θ ρ* − min_θ ρ*`.
    pub roundness: f64,
    /// `(ρ₁, ρ₂)` with `max_θ H(ρ₁) < c < min_θ H(ρ₂)`.
    pub certificate: Option<(f64, f64)>,
    /// Scanned range and the extremes of `H` seen on it.
    pub scanned: (f64, f64),
    pub h_range: (f64, f64),
}

impl CmcRecord {
    pub fn found(&self) -> bool {
        self.radii.is_some()
    }
}

/// Scans one direction, returning `H` samples.
fn scan(field: &ConformalField, k: usize, theta: f64, s: &ScanSettings) -> (Vec<f64>, Vec<f64>) {
    let n = ((s.rho_max - s.rho_min) / s.step).ceil() as usize;
    let rho: Vec<f64> = (0..=n).map(|i| s.rho_min + (s.rho_max - s.rho_min) * i as f64 / n as f64).collect();
    let h = rho.iter().map(|&r| mean_curvature_at(field, k, r, theta)).collect();
    (rho, h)
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Finds all crossings of every target around center `k`.
pub fn find_cmc_all(field: &ConformalField, k: usize, targets: &[f64], s: &ScanSettings) -> Result<Vec<CmcRecord>> {
    check_range(field, k, s.rho_min, s.rho_max)?;
    let delta = field.metric.cfg.deltas[k];
    let thetas: Vec<f64> = (0..s.n_theta).map(|j| theta_sample(j, s.n_theta)).collect();
    let scans: Vec<(Vec<f64>, Vec<f64>)> = thetas.iter().map(|&t| scan(field, k, t, s)).collect();
    let h_range = scans
        .iter()
        .flat_map(|(_, h)| h.iter())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let mut out = Vec::new();
    for &c in targets {
        let mut crossings = Vec::with_capacity(thetas.len());
        let mut selected = Vec::with_capacity(thetas.len());
        for (j, (rho, h)) in scans.iter().enumerate() {
            let f = |r: f64| mean_curvature_at(field, k, r, thetas[j]) - c;
            let mut list = Vec::new();
            for i in 1..rho.len() {
                let (a, b) = (h[i - 1] - c, h[i] - c);
                if (a < 0.0) != (b < 0.0) {
                    list.push(Crossing { rho: bisect(f, rho[i - 1], rho[i], s.tol), upward: b > a });
                }
            }
            selected.push(list.iter().find(|x| x.upward && x.rho > 0.5 * delta && x.rho < delta).map(|x| x.rho));
            crossings.push(list);
        }
        let radii: Option<Vec<f64>> = selected.into_iter().collect();
        let (mut mean, mut roundness, mut certificate) = (f64::NAN, f64::NAN, None);
        if let Some(r) = &radii {
            mean = r.iter().sum::<f64>() / r.len() as f64;
            let (lo, hi) = r.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
            roundness = hi - lo;
            certificate = certify(field, k, c, &thetas, lo, hi, s.step);
        }
        out.push(CmcRecord {
            center: k,
            target: c,
            crossings,
            radii,
            mean_radius: mean,
            roundness,
            certificate,
            scanned: (s.rho_min, s.rho_max),
            h_range,
        });
    }
    Ok(out)
}

/// Looks for `ρ₁ < lo`, `ρ₂ > hi` bracketing the target uniformly in `θ`,
/// trying offsets `step / 2^i`.
fn certify(field: &ConformalField, k: usize, c: f64, thetas: &[f64], lo: f64, hi: f64, step: f64) -> Option<(f64, f64)> {
    let mut eps = step;
    for _ in 0..30 {
        let (r1, r2) = (lo - eps, hi + eps);
        let below = thetas.iter().map(|&t| mean_curvature_at(field, k, r1, t)).fold(f64::NEG_INFINITY, f64::max);
        let above = thetas.iter().map(|&t| mean_curvature_at(field, k, r2, t)).fold(f64::INFINITY, f64::min);
        if below < c && c < above {
            return Some((r1, r2));
        }
        eps *= 0.5;
    }
    None
}

pub fn find_cmc(field: &ConformalField, k: usize, target: f64, s: &ScanSettings) -> Result<CmcRecord> {
    Ok(find_cmc_all(field, k, &[target], s)?.remove(0))
}

/// Surfaces of all centers and targets with the structural checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonReport {
    pub records: Vec<CmcRecord>,
    /// Per center: all three targets found and `ρ*₋₂ < ρ*₀ < ρ*₊₂` in every
    /// direction.
    pub nested: Vec<bool>,
    /// Every selected crossing lies inside its `B(δ)`.
    pub placed: bool,
    /// Smallest `|z_i − z_j| − max ρ*_i − max ρ*_j` over pairs of centers.
    pub separation: f64,
    /// Every found surface has a uniform certificate.
    pub certified: bool,
}

impl HorizonReport {
    pub fn record(&self, center: usize, target: f64) -> Option<&CmcRecord> {
        self.records.iter().find(|r| r.center == center && r.target == target)
    }

    pub fn surfaces_found(&self) -> usize {
        self.records.iter().filter(|r| r.found()).count()
    }
}

pub fn detect(field: &ConformalField, s: &ScanSettings) -> Result<HorizonReport> {
    let cfg = &field.metric.cfg;
    let mut records = Vec::new();
    for k in 0..cfg.centers_z.len() {
        records.extend(find_cmc_all(field, k, &TARGETS, s)?);
    }
    let nk = cfg.centers_z.len();
    let mut nested = vec![false; nk];
    let mut outer = vec![0.0f64; nk];
    for k in 0..nk {
        let rs: Vec<&CmcRecord> = records.iter().filter(|r| r.center == k).collect();
        for r in &rs {
            if let Some(v) = &r.radii {
                outer[k] = outer[k].max(v.iter().cloned().fold(0.0, f64::max));
            }
        }
        if let [a, b, c] = rs.as_slice() {
            if let (Some(x), Some(y), Some(z)) = (&a.radii, &b.radii, &c.radii) {
                nested[k] = (0..x.len()).all(|j| x[j] < y[j] && y[j] < z[j]);
            }
        }
    }
    let placed = records
        .iter()
        .all(|r| r.radii.as_ref().is_none_or(|v| v.iter().all(|&x| x < cfg.deltas[r.center])));
    let mut separation = f64::INFINITY;
    for i in 0..nk {
        for j in i + 1..nk {
            separation = separation.min((cfg.centers_z[j] - cfg.centers_z[i]).abs() - outer[i] - outer[j]);
        }
    }
    let certified = records.iter().all(|r| !r.found() || r.certificate.is_some());
    Ok(HorizonReport { records, nested, placed, separation, certified })
}

/// Displacement of one surface between two fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Displacement {
    pub center: usize,
    pub target: f64,
    /// `max_θ |ρ*_after − ρ*_before|`; NaN when absent on either side.
    pub max_shift: f64,
    pub present_before: bool,
    pub present_after: bool,
}

impl Displacement {
    /// Present before the deformation and lost after it.
    pub fn lost(&self) -> bool {
        self.present_before && !self.present_after
    }
}

pub fn persistence(before: &ConformalField, after: &ConformalField, s: &ScanSettings) -> Result<Vec<Displacement>> {
    let a = detect(before, s)?;
    let b = detect(after, s)?;
    Ok(persistence_from(&a, &b))
}

pub fn persistence_from(before: &HorizonReport, after: &HorizonReport) -> Vec<Displacement> {
    before
        .records
        .iter()
        .map(|r| {
            let other = after.record(r.center, r.target);
            let shift = match (&r.radii, other.and_then(|o| o.radii.as_ref())) {
                (Some(x), Some(y)) => x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max),
                _ => f64::NAN,
            };
            Displacement {
                center: r.center,
                target: r.target,
                max_shift: shift,
                present_before: r.found(),
                present_after: other.is_some_and(|o| o.found()),
            }
        })
        .collect()
}

/// `max_ρ (max_θ w − min_θ w)` on `[a, b]` about center `k`.
pub fn angular_variation(field: &ConformalField, k: usize, a: f64, b: f64, n_theta: usize) -> f64 {
    let zc = field.metric.cfg.centers_z[k];
    let mut m = 0.0f64;
    for i in 0..=20 {
        let rho = a + (b - a) * i as f64 / 20.0;
        let (lo, hi) = (0..n_theta).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), j| {
            let (z, r) = polar_to_axial(rho, theta_sample(j, n_theta), zc);
            let w = field.w_at(z, r).0;
            (lo.min(w), hi.max(w))
        });
        m = m.max(hi - lo);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fixture_seed;
    use crate::gluing::{glue, GlueConfig, GlueMode};
    use crate::grid::{AxialGrid, GridSpec};
    use crate::seedprofile::{ads_schw_profile, RadialProfile};

    fn single(p: RadialProfile, delta: f64) -> ConformalField {
        let cfg = GlueConfig::collinear(3.0, vec![p], vec![delta], GlueMode::Superposition).unwrap();
        let grid = AxialGrid::new(&cfg.centers_z, 6.0, &GridSpec { h_fine: 0.08, ..GridSpec::default() }).unwrap();
        glue(&cfg, grid).unwrap()
    }

    #[test]
    fn hyperbolic_has_no_horizons() {
        let f = single(RadialProfile::hyperbolic(40.0), 0.98);
        let p = h_profile(&f, 0, &[0.5, 1.0, 3.0], 8).unwrap();
        for row in &p.h {
            for (h, r) in row.iter().zip(&p.rho) {
                assert!((h - 2.0 / r.tanh()).abs() < 1e-12);
            }
        }
        let s = ScanSettings { n_theta: 4, ..ScanSettings::default() };
        let rec = find_cmc(&f, 0, 0.0, &s).unwrap();
        assert!(!rec.found() && rec.crossings.iter().all(|c| c.is_empty()));
        assert!(rec.h_range.0 > 2.0);
    }

    #[test]
    fn exterior_minimal_sphere() {
        let p = ads_schw_profile(1.0, 40.0).unwrap();
        let rho_h = p.rho_h;
        let f = single(p, 0.98);
        let s = ScanSettings { n_theta: 4, rho_min: rho_h + 1e-4, ..ScanSettings::default() };
        let rec = find_cmc(&f, 0, 0.0, &s).unwrap();
        // the horizon itself is the scan start; H rises from 0 beyond it
        assert!(rec.crossings.iter().all(|c| c.is_empty()));
        assert!(mean_curvature_at(&f, 0, rho_h, 0.3).abs() < 1e-6);
    }

    #[test]
    fn fixture_seed_has_three_nested_surfaces() {
        let f = single(fixture_seed().unwrap(), 0.98);
        let s = ScanSettings { n_theta: 5, ..ScanSettings::default() };
        let rep = detect(&f, &s).unwrap();
        assert_eq!(rep.surfaces_found(), 3);
        assert!(rep.nested[0] && rep.placed && rep.certified);
        let r0 = rep.record(0, 0.0).unwrap();
        assert!(r0.roundness < 1e-12, "radial field gives round surfaces");
        let after = persistence(&f, &f, &s).unwrap();
        assert!(after.iter().all(|d| d.max_shift == 0.0));
    }

    #[test]
    fn profile_range_is_checked() {
        let f = single(RadialProfile::hyperbolic(40.0), 0.98);
        assert!(h_profile(&f, 0, &[1.0, 7.0], 4).is_err());
        assert!(h_profile(&f, 3, &[1.0], 4).is_err());
    }
}
