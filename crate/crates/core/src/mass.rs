//! Mass of the asymptotically hyperbolic end from the `e^{−3ρ}` tail.
//!
//! Along each ray from a chart center on the axis, `ln |w − 1|` is fitted
//! against `ρ` on a far-field window. The amplitude `A(θ)` of the fixed
//! `−3` slope stands in for the trace of the mass aspect,
//! `tr h = c_cal A`, and
//! `M = (1/16π) [(∫ tr h)² − |∫ tr h · x|²]^{1/2}` over the unit sphere.

use crate::error::{ConfigError, Result};
use crate::gluing::{ConformalField, Provenance};
use crate::hypgeom::polar_to_axial;
use crate::quad;
use crate::horizons::theta_sample;
use crate::stats::{intercept_with_slope, linear_fit};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Amplitudes below this are treated as zero mass.
pub const DEGENERATE_AMPLITUDE: f64 = 1e-14;

/// Points per ray in the fit window.
const FIT_POINTS: usize = 41;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AspectFit {
    /// Axial position of the chart center.
    pub center_z: f64,
    pub window: (f64, f64),
    pub theta: Vec<f64>,
    /// `A(θ)` from the fixed `−3` slope.
    pub amplitude: Vec<f64>,
    /// Free-slope fit per direction.
    pub slope: Vec<f64>,
    /// Largest relative rms misfit of the tail model over the window.
    pub residual: f64,
    pub degenerate: bool,
}

impl AspectFit {
    pub fn slope_range(&self) -> (f64, f64) {
        self.slope.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| (a.min(s), b.max(s)))
    }

    /// Largest `|A(θ) − A(π − θ)|` relative to `max |A|`.
    pub fn reflection_asymmetry(&self) -> f64 {
        let n = self.amplitude.len();
        let scale = self.amplitude.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        (0..n).map(|j| (self.amplitude[j] - self.amplitude[n - 1 - j]).abs()).fold(0.0, f64::max) / scale
    }
}

/// Default window `[R − 3, R − 1]`, `R` the largest radius about `center_z`
/// that stays in the box.
pub fn default_window(field: &ConformalField, center_z: f64) -> (f64, f64) {
    let r = field.grid.rho_max - center_z.abs();
    (r - 3.0, r - 1.0)
}

struct RayFit {
    amplitude: f64,
    slope: f64,
    rms: f64,
}

fn window_nodes(window: (f64, f64)) -> Vec<f64> {
    let (lo, hi) = window;
    (0..FIT_POINTS).map(|i| lo + (hi - lo) * i as f64 / (FIT_POINTS - 1) as f64).collect()
}

fn check_window(field: &ConformalField, center_z: f64, window: (f64, f64)) -> Result<()> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) || center_z.abs() + hi > field.grid.rho_max {
        return Err(ConfigError::Invalid(format!("fit window [{lo}, {hi}] about z = {center_z} leaves the grid")).into());
    }
    Ok(())
}

/// `None` when the tail vanishes along the ray.
fn fit_ray(field: &ConformalField, center_z: f64, rho: &[f64], t: f64) -> Option<RayFit> {
    let dev: Vec<f64> = rho
        .iter()
        .map(|&r| {
            let (z, rr) = polar_to_axial(r, t, center_z);
            field.w_at(z, rr).0
        })
        .collect();
    let scaled_max = dev.iter().zip(rho).fold(0.0f64, |m, (d, r)| m.max(d.abs() * (3.0 * r).exp()));
    if scaled_max < DEGENERATE_AMPLITUDE || dev.contains(&0.0) {
        return None;
    }
    let sign = dev[0].signum();
    let y: Vec<f64> = dev.iter().map(|d| d.abs().ln()).collect();
    let (slope, _) = linear_fit(rho, &y);
    if field.provenance == Provenance::Solved {
        // w − 1 = A e^{−3ρ} + B e^{ρ}: the second term is the growing mode
        // the Dirichlet condition at the last radius leaves behind.
        let rb = field.solved_radius;
        let v: Vec<f64> = dev.iter().zip(rho).map(|(d, r)| d * (3.0 * r).exp()).collect();
        let g: Vec<f64> = rho.iter().map(|r| (4.0 * (r - rb)).exp()).collect();
        let (b, a) = linear_fit(&g, &v);
        let rms = (g.iter().zip(&v).map(|(x, y)| (y - a - b * x).powi(2)).sum::<f64>() / v.len() as f64).sqrt() / a.abs();
        return Some(RayFit { amplitude: a, slope, rms });
    }
    let b = intercept_with_slope(rho, &y, -3.0);
    let rms = (rho.iter().zip(&y).map(|(r, v)| (v - (b - 3.0 * r)).powi(2)).sum::<f64>() / rho.len() as f64).sqrt();
    Some(RayFit { amplitude: sign * b.exp(), slope, rms })
}

pub fn fit_aspect(field: &ConformalField, center_z: f64, window: (f64, f64), n_theta: usize) -> Result<AspectFit> {
    check_window(field, center_z, window)?;
    let rho = window_nodes(window);
    let theta: Vec<f64> = (0..n_theta).map(|j| theta_sample(j, n_theta)).collect();
    let mut amplitude = Vec::with_capacity(n_theta);
    let mut slope = Vec::with_capacity(n_theta);
    let mut residual = 0.0f64;
    let mut degenerate = false;
    for &t in &theta {
        match fit_ray(field, center_z, &rho, t) {
            Some(r) => {
                residual = residual.max(r.rms);
                slope.push(r.slope);
                amplitude.push(r.amplitude);
            }
            None => {
                degenerate = true;
                break;
            }
        }
    }
    if degenerate {
        return Ok(AspectFit {
            center_z,
            window,
            amplitude: vec![0.0; n_theta],
            slope: vec![f64::NAN; n_theta],
            theta,
            residual: 0.0,
            degenerate: true,
        });
    }
    Ok(AspectFit { center_z, window, theta, amplitude, slope, residual, degenerate: false })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassReport {
    pub mass: f64,
    /// `∫ tr h`.
    pub monopole: f64,
    /// `∫ tr h · x` (only the axial component is nonzero).
    pub dipole: [f64; 3],
    pub c_cal: f64,
    /// `monopole² − |dipole|²`.
    pub radicand: f64,
    /// False when the radicand is negative; `mass` is then `√|radicand| / 16π`.
    pub valid: bool,
    pub degenerate: bool,
}

/// Evaluates the mass formula with trapezoidal quadrature in `θ` and weight
/// `2π sin θ`.
pub fn wang_mass(fit: &AspectFit, c_cal: f64) -> MassReport {
    let n = fit.theta.len();
    let (mut mono, mut dip) = (0.0, 0.0);
    let h = fit.theta.get(1).map_or(PI, |t| t - fit.theta[0]);
    for j in 0..n {
        let w = if j == 0 || j + 1 == n { 0.5 } else { 1.0 };
        let t = fit.theta[j];
        let tr = c_cal * fit.amplitude[j];
        mono += w * h * 2.0 * PI * t.sin() * tr;
        dip += w * h * 2.0 * PI * t.sin() * t.cos() * tr;
    }
    report(mono, dip, c_cal, fit.degenerate)
}

/// Directions sampled for the reported aspect.
pub const MASS_THETA: usize = 129;

fn report(mono: f64, dip: f64, c_cal: f64, degenerate: bool) -> MassReport {
    let radicand = mono * mono - dip * dip;
    MassReport {
        mass: radicand.abs().sqrt() / (16.0 * PI),
        monopole: mono,
        dipole: [0.0, 0.0, dip],
        c_cal,
        radicand,
        valid: radicand >= 0.0,
        degenerate,
    }
}

/// The mass formula with the `θ` integrals done adaptively, fitting `A(θ)`
/// along each ray the quadrature asks for. The aspect of a far center is
/// peaked in a cone of width `~e^{−τ}`, which a fixed sample misses.
pub fn integrate_mass(field: &ConformalField, center_z: f64, window: (f64, f64), c_cal: f64) -> Result<MassReport> {
    check_window(field, center_z, window)?;
    let rho = window_nodes(window);
    let amp = |t: f64| fit_ray(field, center_z, &rho, t).map_or(0.0, |r| r.amplitude);
    let probe = fit_aspect(field, center_z, window, 17)?;
    if probe.degenerate {
        return Ok(report(0.0, 0.0, c_cal, true));
    }
    let scale = 4.0 * PI * c_cal.abs() * probe.amplitude.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let tol = 1e-11 * scale;
    let mono = quad::integrate(|t| 2.0 * PI * t.sin() * c_cal * amp(t), 0.0, PI, tol, 1e-10)?;
    let dip = quad::integrate(|t| 2.0 * PI * t.sin() * t.cos() * c_cal * amp(t), 0.0, PI, tol, 1e-10)?;
    Ok(report(mono, dip, c_cal, false))
}

/// `c_cal` making the mass of a unit-mass exterior seed at the chart center
/// exactly 1.
pub fn calibrate(field: &ConformalField) -> Result<f64> {
    let raw = integrate_mass(field, 0.0, default_window(field, 0.0), 1.0)?;
    if raw.degenerate || !(raw.mass > 0.0) {
        return Err(ConfigError::Invalid("calibration field has no mass".into()).into());
    }
    Ok(1.0 / raw.mass)
}

/// Mass about `center_z` with the default window, plus the sampled aspect.
pub fn measure_about(field: &ConformalField, center_z: f64, c_cal: f64) -> Result<(AspectFit, MassReport)> {
    let window = default_window(field, center_z);
    let fit = fit_aspect(field, center_z, window, MASS_THETA)?;
    let rep = integrate_mass(field, center_z, window, c_cal)?;
    Ok((fit, rep))
}

/// Mass about the midpoint.
pub fn measure(field: &ConformalField, c_cal: f64) -> Result<(AspectFit, MassReport)> {
    measure_about(field, 0.0, c_cal)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(amp: impl Fn(f64) -> f64, n: usize) -> AspectFit {
        let theta: Vec<f64> = (0..n).map(|j| theta_sample(j, n)).collect();
        AspectFit {
            center_z: 0.0,
            window: (1.0, 2.0),
            amplitude: theta.iter().map(|&t| amp(t)).collect(),
            slope: vec![-3.0; n],
            theta,
            residual: 0.0,
            degenerate: false,
        }
    }

    #[test]
    fn zero_aspect_has_zero_mass() {
        let m = wang_mass(&synthetic(|_| 0.0, 33), 4.0);
        assert_eq!(m.mass, 0.0);
        assert!(m.valid);
    }

    #[test]
    fn constant_aspect() {
        // ∫ c A = 4π c A, so M = c A / 4
        let m = wang_mass(&synthetic(|_| 1.5, 257), 4.0);
        assert!((m.mass - 1.5).abs() < 1e-4);
        assert!(m.dipole[2].abs() < 1e-12);
    }

    #[test]
    fn boosted_aspect_keeps_its_mass() {
        // a unit mass seen from a chart center at distance s
        for s in [0.5, 1.5] {
            let (c, sh) = (f64::cosh(s), f64::sinh(s));
            let m = wang_mass(&synthetic(|t| (c - sh * t.cos()).powi(-3), 513), 4.0);
            assert!((m.mass - 1.0).abs() < 5e-3, "{s}: {}", m.mass);
        }
    }

    #[test]
    fn dipole_dominated_aspect_is_flagged() {
        let m = wang_mass(&synthetic(|t| t.cos(), 65), 4.0);
        assert!(!m.valid && m.radicand < 0.0);
    }
}
