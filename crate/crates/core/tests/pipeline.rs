use ahglue::error::{ConfigError, Error};
use ahglue::gluing::GlueMode;
use ahglue::grid::GridSpec;
use ahglue::pipeline::{refine_study, run_pipeline, sweep_tau, Exit, RunConfig};
use ahglue::seedprofile::SeedParams;
use ahglue::yamabe::SolveSettings;
use std::collections::BTreeMap;
use std::path::Path;

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn runs_are_byte_for_byte_reproducible() {
    let mut c = RunConfig::fixture(4.0);
    c.mode = Some(GlueMode::Superposition);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_pipeline(&c).unwrap().write(a.path()).unwrap();
    run_pipeline(&c).unwrap().write(b.path()).unwrap();
    let (fa, fb) = (files(a.path()), files(b.path()));
    assert!(fa.len() >= 12, "{:?}", fa.keys());
    assert_eq!(fa.keys().collect::<Vec<_>>(), fb.keys().collect::<Vec<_>>());
    for (name, bytes) in &fa {
        assert!(bytes == &fb[name], "{name} differs");
    }
}

fn config_error(c: &RunConfig) -> ConfigError {
    match c.prepare() {
        Err(Error::Config(e)) => e,
        other => panic!("expected a config error, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn invalid_configurations_are_named() {
    let base = RunConfig::fixture(4.0);
    assert!(matches!(config_error(&RunConfig { schema: 7, ..base.clone() }), ConfigError::Schema(7)));
    assert!(matches!(config_error(&RunConfig { centers: vec![], ..base.clone() }), ConfigError::NoCenters));
    assert!(matches!(config_error(&base.with_tau(-1.0)), ConfigError::NonPositiveTau(_)));
    assert!(matches!(config_error(&base.with_tau(2.0)), ConfigError::TauTooSmall { .. }));

    let wide = SeedParams { delta: 3.5, ..SeedParams::hyperbolic() };
    let close = RunConfig { centers: vec![wide; 2], mode: Some(GlueMode::Superposition), ..base.with_tau(3.0) };
    assert!(matches!(config_error(&close), ConfigError::CentersTooClose { .. }));
    let crowded = RunConfig { centers: vec![SeedParams { delta: 2.5, ..SeedParams::hyperbolic() }; 2], ..base.with_tau(3.0) };
    assert!(matches!(config_error(&crowded), ConfigError::AnnulusOverlapsCore { .. }));

    assert!(matches!(config_error(&RunConfig { box_radius: Some(10.0), ..base.clone() }), ConfigError::GridTooSmall { .. }));
    let radii = |r: Vec<f64>| RunConfig { solve: SolveSettings { radii: r, ..Default::default() }, ..base.clone() };
    assert!(matches!(config_error(&radii(vec![14.0, 12.0])), ConfigError::RadiiNotIncreasing(_)));
    assert!(matches!(config_error(&radii(vec![8.0, 14.0])), ConfigError::FirstRadiusTooSmall { .. }));
    assert!(matches!(config_error(&radii(vec![12.0, 20.0])), ConfigError::RadiusBeyondGrid { .. }));
    let tight = RunConfig { grid: GridSpec { node_budget: 1000, ..Default::default() }, ..base.clone() };
    assert!(matches!(config_error(&tight), ConfigError::NodeBudget { .. }));
    let bad_solve = RunConfig { solve: SolveSettings { max_steps: 0, ..Default::default() }, ..base.clone() };
    assert!(matches!(config_error(&bad_solve), ConfigError::Invalid(_)));
    assert!(matches!(config_error(&RunConfig { rho_bar: Some(-1.0), ..base.clone() }), ConfigError::Invalid(_)));

    let bad_seed = RunConfig { centers: vec![SeedParams { m: -1.0, ..SeedParams::hyperbolic() }], ..base.clone() };
    let e = bad_seed.prepare().err().unwrap();
    assert!(matches!(e, Error::SeedParams(_)));
    assert_eq!(Exit::of_error(&e), Exit::Config);

    assert!(matches!(sweep_tau(&base, &[4.0]), Err(Error::Config(ConfigError::SweepTooShort(1)))));
    assert!(matches!(refine_study(&base, 1), Err(Error::Config(ConfigError::TooFewLevels(1)))));
}

#[test]
fn malformed_toml_is_a_config_error() {
    let e = RunConfig::from_toml("schema = 1\ntau = 4.0\nbogus = 3\n[[center]]\n").unwrap_err();
    assert_eq!(Exit::of_error(&e), Exit::Config);
    let e = RunConfig::from_toml("schema = 1\n").unwrap_err();
    assert_eq!(Exit::of_error(&e), Exit::Config);
}

#[test]
fn massless_sweep_is_flagged_degenerate() {
    let rep = sweep_tau(&RunConfig::trivial(4.0, 2), &[4.0, 5.0, 6.0]).unwrap();
    assert!(rep.failure.is_none());
    assert!(rep.degenerate);
    assert!(rep.rows.iter().all(|r| r.sup_dev <= 1e-12 && r.glue_defect <= 1e-10));
}

#[test]
fn surface_radii_do_not_depend_on_the_grid() {
    let mut c = RunConfig::fixture(4.0);
    c.grid.h_fine = 0.08;
    let rep = refine_study(&c, 3).unwrap();
    for (i, orders) in rep.radius_order.iter().enumerate() {
        let radii: Vec<f64> = rep.rows.iter().map(|r| r.radii[i]).collect();
        println!("surface {i}: radii {radii:?}, order {orders:?}");
        let spread = radii.iter().fold(0.0f64, |m, r| m.max((r - radii[2]).abs()));
        assert!(spread <= 1e-8, "surface {i}: {radii:?}");
    }
    assert!(rep.defect_order.iter().all(|p| p.is_finite() && *p > 0.0));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let fixture = RunConfig::load(dir.join("fixture.toml")).unwrap();
    assert_eq!(RunConfig { out: None, ..fixture }, RunConfig::fixture(4.0));
    assert_eq!(RunConfig::load(dir.join("hyperbolic.toml")).unwrap().centers, RunConfig::trivial(4.0, 2).centers);
    let sup = RunConfig::load(dir.join("superposition.toml")).unwrap();
    assert_eq!(sup.glue_mode(), GlueMode::Superposition);
    sup.prepare().unwrap();
}
