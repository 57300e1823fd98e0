use ahglue::gluing::GlueMode;
use ahglue::pipeline::{run_pipeline, RunConfig};
use ahglue::yamabe::{exhaust, solved_curvature, SolveSettings, COERCIVITY_FLOOR};

fn config(mode: GlueMode, tau: f64) -> RunConfig {
    let mut c = RunConfig::fixture(tau);
    c.mode = Some(mode);
    c
}

#[test]
fn reflection_symmetry_survives_the_solve() {
    let p = config(GlueMode::Superposition, 3.0).prepare().unwrap();
    let glued = p.glued().unwrap();
    let solved = exhaust(&glued, &SolveSettings { radii: p.radii.clone(), ..Default::default() }).unwrap();
    let (g, d) = (&solved.field.grid, &solved.field.delta);
    let (nz, nr) = (g.nz(), g.nr());
    let mut worst = 0.0f64;
    for iz in 0..nz {
        for ir in 0..nr {
            worst = worst.max((d[g.idx(iz, ir)] - d[g.idx(nz - 1 - iz, ir)]).abs());
        }
    }
    assert!(worst <= 1e-10, "{worst:e}");
}

#[test]
fn exhaustion_is_stable_in_the_last_radius() {
    let p = config(GlueMode::ThreeZone, 3.0).prepare().unwrap();
    let glued = p.glued().unwrap();
    let big = *p.radii.last().unwrap();
    assert!(p.radii.len() >= 3);
    // the shorter run only has to be a solution, not converged in R
    let short = SolveSettings { radii: p.radii[..p.radii.len() - 1].to_vec(), cauchy_tol: 1e-6, ..Default::default() };
    let long = SolveSettings { radii: p.radii.clone(), ..Default::default() };
    let a = exhaust(&glued, &short).unwrap();
    let b = exhaust(&glued, &long).unwrap();
    let g = &glued.grid;
    let mut worst = 0.0f64;
    for i in 0..g.len() {
        if g.rho_mid(i) < big - 4.0 {
            worst = worst.max((a.field.w_node(i) - b.field.w_node(i)).abs());
        }
    }
    assert!(worst < long.cauchy_tol, "{worst:e}");
}

#[test]
fn fixture_run_stays_above_the_floor_and_inside_the_envelope() {
    let b = run_pipeline(&config(GlueMode::ThreeZone, 4.0)).unwrap();
    assert!(b.solved.min_w > COERCIVITY_FLOOR);
    let bar = &b.summary.barrier;
    assert!(bar.holds && bar.checked > 0, "{} violations", bar.violations);
    assert!(b.solved.diffs.iter().any(|&d| d < SolveSettings::default().cauchy_tol));
    for s in &b.solved.solves {
        assert!(s.trace.last().unwrap() <= &SolveSettings::default().newton_tol);
    }
}

#[test]
fn hyperbolic_seeds_need_no_correction() {
    let p = RunConfig::trivial(4.0, 2).prepare().unwrap();
    let glued = p.glued().unwrap();
    let solved = exhaust(&glued, &SolveSettings { radii: p.radii.clone(), ..Default::default() }).unwrap();
    assert!(solved.sup_dev <= 1e-12);
    let r = solved_curvature(&solved.field);
    let worst = r.iter().filter(|v| v.is_finite()).fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(worst <= 1e-10, "{worst:e}");
}
