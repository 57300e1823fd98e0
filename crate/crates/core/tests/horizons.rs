use ahglue::gluing::GlueMode;
use ahglue::horizons::{angular_variation, detect, ScanSettings};
use ahglue::pipeline::{run_pipeline, RunBundle, RunConfig};

fn run(mode: GlueMode) -> RunBundle {
    let mut c = RunConfig::fixture(4.0);
    c.mode = Some(mode);
    run_pipeline(&c).unwrap()
}

fn check_structure(b: &RunBundle) {
    let h = &b.horizons;
    let cfg = &b.solved.field.metric.cfg;
    assert_eq!(h.surfaces_found(), 6);
    assert!(h.nested.iter().all(|&n| n));
    assert!(h.placed && h.certified);
    let delta = cfg.deltas.iter().cloned().fold(0.0, f64::max);
    assert!(h.separation >= 2.0 * cfg.tau - 2.0 * delta, "gap {}", h.separation);
    let s = ScanSettings::default();
    for r in &h.records {
        let (a, c) = r.certificate.unwrap();
        let var = angular_variation(&b.solved.field, r.center, a, c, 32);
        assert!(r.roundness <= 10.0 * var + 2.0 * s.tol, "center {} H = {}: {} vs {var}", r.center, r.target, r.roundness);
        assert!(r.radii.as_ref().unwrap().iter().all(|&x| a <= x && x <= c));
    }
}

#[test]
fn three_zone_surfaces_are_nested_round_and_apart() {
    check_structure(&run(GlueMode::ThreeZone));
}

#[test]
fn superposition_surfaces_mirror_each_other() {
    let b = run(GlueMode::Superposition);
    check_structure(&b);
    for t in [-2.0, 0.0, 2.0] {
        let (p, q) = (b.horizons.record(0, t).unwrap(), b.horizons.record(1, t).unwrap());
        assert!((p.mean_radius - q.mean_radius).abs() < 1e-10, "{t}: {} vs {}", p.mean_radius, q.mean_radius);
    }
}

#[test]
fn solving_barely_moves_the_surfaces() {
    let b = run(GlueMode::ThreeZone);
    let before = detect(&b.glued, &ScanSettings::default()).unwrap();
    for (x, y) in before.records.iter().zip(&b.horizons.records) {
        assert!((x.mean_radius - y.mean_radius).abs() < 1e-3, "{} vs {}", x.mean_radius, y.mean_radius);
    }
}
