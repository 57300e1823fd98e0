//! Scan for the fixture seed: the smallest dip that puts upward crossings of
//! `H = −2, 0, +2`, innermost first, inside `(δ/2, δ)` with `δ = 0.98`, each
//! at least `CLEARANCE` from the ends.
//!
//! Prints every admissible candidate; the fixture takes the first line.

use ahglue::curvature::mean_curvature_radial;
use ahglue::fixtures::{FIXTURE_DELTA, PROFILE_RHO_MAX};
use ahglue::horizons::TARGETS;
use ahglue::seedprofile::{seed_profile, SeedParams};

/// Innermost upward crossing of `target` in the sampled profile.
fn crossing(h: &[(f64, f64)], target: f64) -> Option<f64> {
    h.windows(2).find(|w| w[0].1 < target && w[1].1 >= target).map(|w| w[0].0)
}

const CLEARANCE: f64 = 0.02;

fn main() {
    let delta = FIXTURE_DELTA;
    let samples = 2000;
    for dip_amp in [0.005, 0.01, 0.02, 0.04] {
        for cap_depth in [3.5, 4.0, 4.3, 4.7, 5.0, 5.5] {
            for window in [(0.5, 0.9), (0.6, 0.95)] {
                let params = SeedParams { m: 1.0, cap_depth, dip_amp, dip_window: window, delta };
                let Ok(p) = seed_profile(&params, PROFILE_RHO_MAX) else { continue };
                let h: Vec<(f64, f64)> = (0..=samples)
                    .map(|i| {
                        let rho = delta * (0.5 + 0.5 * i as f64 / samples as f64);
                        (rho, mean_curvature_radial(&p, rho))
                    })
                    .collect();
                let found: Option<Vec<f64>> = TARGETS.iter().map(|&t| crossing(&h, t)).collect();
                if let Some(c) = found.filter(|c| c.windows(2).all(|w| w[0] < w[1]) && c[0] - 0.5 * delta >= CLEARANCE && delta - c[2] >= CLEARANCE) {
                    println!("dip_amp {dip_amp} cap_depth {cap_depth} window {window:?} crossings {c:.4?}");
                }
            }
        }
    }
}
