use ahglue::fixtures::{fixture_seed_params, PROFILE_RHO_MAX};
use ahglue::io::{read_profile, write_profile};
use ahglue::seedprofile::{horizon_radius, seed_profile, SeedParams};
use ahglue::yamabe::COERCIVITY_FLOOR;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = SeedParams> {
    (0.2f64..2.5, 0.0f64..5.0, 0.0f64..0.04, 0.1f64..0.4).prop_map(|(m, cap_depth, dip_amp, width)| {
        let rho_h = horizon_radius(m);
        SeedParams { m, cap_depth, dip_amp, dip_window: (rho_h + 0.05, rho_h + 0.05 + width), delta: rho_h + 0.5 }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn profiles_decay_and_stay_positive(p in params()) {
        let prof = seed_profile(&p, 20.0).unwrap();
        prop_assert!(prof.decay_slope(18.0, 20.0, 21) <= -2.9);
        prop_assert!(prof.min_w() > 0.0);
    }

    #[test]
    fn profiles_round_trip_through_text(p in params()) {
        let prof = seed_profile(&p, 12.0).unwrap();
        let mut buf = Vec::new();
        write_profile(&prof, &mut buf).unwrap();
        prop_assert_eq!(read_profile(buf.as_slice()).unwrap(), prof);
    }
}

#[test]
fn fixture_clears_the_coercivity_floor() {
    let p = seed_profile(&fixture_seed_params(), PROFILE_RHO_MAX).unwrap();
    assert!(p.min_w() > COERCIVITY_FLOOR, "{}", p.min_w());
}

#[test]
fn trivial_seed_is_hyperbolic() {
    let p = seed_profile(&SeedParams::hyperbolic(), 20.0).unwrap();
    for i in 0..=400 {
        let (w, d1, d2) = p.eval(0.05 * i as f64);
        assert!((w - 1.0).abs() <= 1e-12 && d1.abs() <= 1e-12 && d2.abs() <= 1e-12);
    }
}
