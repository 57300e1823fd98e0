//! Browser bindings for three cheap views of the construction: the mean
//! curvature of a seed's coordinate spheres, an axis slice of the glued
//! factor, and the radial barrier pair. Every op returns a JSON string.

use ahglue::curvature::mean_curvature_radial;
use ahglue::fixtures::PROFILE_RHO_MAX;
use ahglue::gluing::{GlueConfig, GlueMode, GluedMetric};
use ahglue::horizons::TARGETS;
use ahglue::seedprofile::{seed_profile, SeedParams};
use ahglue::yamabe::Barrier;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn check_samples(n: usize) -> Result<(), String> {
    if (2..=20_000).contains(&n) {
        Ok(())
    } else {
        Err(format!("sample count must lie in [2, 20000], got {n}"))
    }
}

/// `w` and `H(S_ρ)` on `[0.01, 3]` (capped seeds are smooth through the
/// center; exterior seeds start just outside `ρ_h`), with the radii where `H` crosses
/// each target, located by linear interpolation between samples.
pub fn seed_curve(params: SeedParams, n: usize) -> Result<Value, String> {
    check_samples(n)?;
    let p = seed_profile(&params, PROFILE_RHO_MAX).map_err(|e| e.to_string())?;
    let lo = if params.cap_depth > 0.0 || params.m == 0.0 { 0.01 } else { p.rho_h + 1e-3 };
    let rho = linspace(lo, 3.0, n);
    let w: Vec<f64> = rho.iter().map(|&r| p.eval(r).0).collect();
    let h: Vec<f64> = rho.iter().map(|&r| mean_curvature_radial(&p, r)).collect();
    let crossings: Vec<Value> = TARGETS
        .iter()
        .map(|&c| {
            let at: Vec<f64> = (1..n)
                .filter(|&i| (h[i - 1] - c) * (h[i] - c) < 0.0)
                .map(|i| rho[i - 1] + (rho[i] - rho[i - 1]) * (c - h[i - 1]) / (h[i] - h[i - 1]))
                .collect();
            json!({ "target": c, "rho": at })
        })
        .collect();
    Ok(json!({ "rho_h": p.rho_h, "rho": rho, "w": w, "h": h, "crossings": crossings }))
}

/// `w̃ − 1`, `R + 6` and the defect `R − R_t` along the axis for two equal
/// seeds `2τ` apart. Samples sit at cell midpoints so none lands on a
/// center.
pub fn glue_axis(params: SeedParams, tau: f64, three_zone: bool, n: usize) -> Result<Value, String> {
    check_samples(n)?;
    let p = seed_profile(&params, PROFILE_RHO_MAX).map_err(|e| e.to_string())?;
    let mode = if three_zone { GlueMode::ThreeZone } else { GlueMode::Superposition };
    let cfg = GlueConfig::collinear(tau, vec![p.clone(), p], vec![params.delta; 2], mode).map_err(|e| e.to_string())?;
    let (z0, z1) = (cfg.centers_z[0], cfg.centers_z[1]);
    let metric = GluedMetric::new(cfg).map_err(|e| e.to_string())?;
    let (a, b) = (z0 - 3.0, z1 + 3.0);
    let z: Vec<f64> = (0..n).map(|i| a + (b - a) * (i as f64 + 0.5) / n as f64).collect();
    let bg: Vec<_> = z.iter().map(|&x| metric.at(x, 0.0)).collect();
    let zone: Vec<_> = z.iter().map(|&x| metric.zone(x, 0.0)).collect();
    Ok(json!({
        "centers": [z0, z1],
        "z": z,
        "dev": bg.iter().map(|b| b.dev).collect::<Vec<_>>(),
        "r_plus6": bg.iter().map(|b| b.r_plus6).collect::<Vec<_>>(),
        "defect": bg.iter().map(|b| b.defect).collect::<Vec<_>>(),
        "zone": zone,
    }))
}

/// `f± = 1 ± λe^{−3ρ}` and `L(f±)` on `[ρ̄, ρ̄ + span]` with `λ = e^{3ρ̄}`.
pub fn barrier_curves(rho_bar: f64, span: f64, n: usize) -> Result<Value, String> {
    check_samples(n)?;
    if !(rho_bar > 0.0 && span > 0.0) {
        return Err(format!("need rho_bar > 0 and span > 0, got {rho_bar}, {span}"));
    }
    let bar = Barrier::new(rho_bar);
    let rho = linspace(rho_bar, rho_bar + span, n);
    let col = |f: &dyn Fn(f64) -> f64| rho.iter().map(|&r| f(r)).collect::<Vec<_>>();
    Ok(json!({
        "rho": rho,
        "f_minus": col(&|r| bar.eval(r, false).0),
        "f_plus": col(&|r| bar.eval(r, true).0),
        "l_minus": col(&|r| bar.operator(r, false)),
        "l_plus": col(&|r| bar.operator(r, true)),
    }))
}

fn to_js(v: Result<Value, String>) -> Result<String, JsValue> {
    v.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

fn params(m: f64, cap_depth: f64, dip_amp: f64, dip_lo: f64, dip_hi: f64, delta: f64) -> SeedParams {
    SeedParams { m, cap_depth, dip_amp, dip_window: (dip_lo, dip_hi), delta }
}

#[wasm_bindgen(js_name = seedCurve)]
pub fn seed_curve_js(m: f64, cap_depth: f64, dip_amp: f64, dip_lo: f64, dip_hi: f64, delta: f64, n: usize) -> Result<String, JsValue> {
    to_js(seed_curve(params(m, cap_depth, dip_amp, dip_lo, dip_hi, delta), n))
}

#[wasm_bindgen(js_name = glueAxis)]
#[allow(clippy::too_many_arguments)]
pub fn glue_axis_js(
    m: f64,
    cap_depth: f64,
    dip_amp: f64,
    dip_lo: f64,
    dip_hi: f64,
    delta: f64,
    tau: f64,
    three_zone: bool,
    n: usize,
) -> Result<String, JsValue> {
    to_js(glue_axis(params(m, cap_depth, dip_amp, dip_lo, dip_hi, delta), tau, three_zone, n))
}

#[wasm_bindgen(js_name = barrierCurves)]
pub fn barrier_curves_js(rho_bar: f64, span: f64, n: usize) -> Result<String, JsValue> {
    to_js(barrier_curves(rho_bar, span, n))
}
