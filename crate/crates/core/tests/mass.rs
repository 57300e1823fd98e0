use ahglue::fixtures::{calibration_field, exterior_field, C_CAL, CALIBRATION_RHO_MAX};
use ahglue::gluing::GlueMode;
use ahglue::grid::GridSpec;
use ahglue::mass::{calibrate, measure};
use ahglue::pipeline::{run_pipeline, RunConfig};

#[test]
fn calibration_reproduces_the_committed_constant() {
    let c = calibrate(&calibration_field(&GridSpec::default()).unwrap()).unwrap();
    assert!((c - C_CAL).abs() <= 1e-8, "{c}");
}

#[test]
fn mass_does_not_depend_on_where_the_seed_sits() {
    let spec = GridSpec::default();
    for z in [1.0, -2.0] {
        let m = measure(&exterior_field(1.0, z, CALIBRATION_RHO_MAX, &spec).unwrap(), C_CAL).unwrap().1;
        assert!((m.mass - 1.0).abs() < 0.01, "z = {z}: {}", m.mass);
        assert!(m.valid);
    }
}

#[test]
fn exterior_masses() {
    let spec = GridSpec::default();
    for m in [0.5, 2.0] {
        let r = measure(&exterior_field(m, 0.0, CALIBRATION_RHO_MAX, &spec).unwrap(), C_CAL).unwrap().1;
        assert!((r.mass - m).abs() <= 0.02 * m, "{m}: {}", r.mass);
    }
    let zero = measure(&exterior_field(0.0, 0.0, CALIBRATION_RHO_MAX, &spec).unwrap(), C_CAL).unwrap().1;
    assert_eq!(zero.mass, 0.0);
    assert!(zero.degenerate);
}

#[test]
fn mass_is_stable_under_refinement() {
    let fine = GridSpec { level: 1, ..GridSpec::default() };
    let r = measure(&exterior_field(1.0, 0.0, CALIBRATION_RHO_MAX, &fine).unwrap(), C_CAL).unwrap().1;
    assert!((r.mass - 1.0).abs() < 0.005, "{}", r.mass);
}

#[test]
fn two_center_mass_against_a_single_seed() {
    let mut c = RunConfig::fixture(4.0);
    c.mode = Some(GlueMode::Superposition);
    let two = run_pipeline(&c).unwrap();
    let one = run_pipeline(&RunConfig { centers: vec![c.centers[0]], ..c.clone() }).unwrap();
    let (m2, m1) = (two.summary.mass.mass, one.summary.mass.mass);
    println!("two centers M = {m2:.6}, one center M = {m1:.6}, ratio {:.4}", m2 / m1);
    assert!(two.summary.mass.valid && m2 > m1);
}
