use std::f64::consts::PI;

use proptest::prelude::*;
use reebkit::constellation::build;
use reebkit::geometry::*;
use reebkit::profiles::*;
use reebkit::spectrum::analytic_spectrum;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn profile_invariants_hold(a in 0.001f64..0.4, extra in 0.01f64..5.0, c in 2.0f64..300.0) {
        let b = 2.0 * a + 0.01 + extra;
        let p = Profile::new(a, b, c.max(1.0 + 2.0 * a + 0.1)).unwrap();
        let r = p.check_invariants(2000);
        prop_assert!(r.all, "{:?}", r);
        prop_assert!((p.h(1.0 + a) - a * a).abs() < 1e-9);
    }

    #[test]
    fn negative_orbits_are_the_periods_below_the_slope(a in 0.001f64..0.2, kappa in 0.0f64..0.6, frac in 0.05f64..0.95) {
        let m = ModelManifold::sphere(2);
        let sp = analytic_spectrum(&m, 40.0).unwrap();
        // b·e^{−κ} strictly between two multiples of π
        let j = 1.0 + (frac * 8.0).floor();
        let b = (j + 0.5) * PI * kappa.exp();
        let h = TunedHamiltonian::new(Profile::new(a, b, 1e4).unwrap(), kappa).unwrap();
        let recs = enumerate_negative(&h, &sp).unwrap();
        prop_assert_eq!(recs.len(), j as usize);
        for r in &recs {
            let ek = kappa.exp();
            prop_assert!(-ek * (1.0 + a) * r.period < r.action && r.action < -ek * r.period + a * a);
            prop_assert!(r.sigma > 1.0 && r.sigma < 1.0 + a);
        }
    }

    #[test]
    fn finely_tuned_implies_positive_delta_s(a in 0.001f64..0.6, kappa in 0.0f64..0.15) {
        let m = ModelManifold::ellipsoid(&[1.0, 1.2]).unwrap();
        let sp = analytic_spectrum(&m, 10.0).unwrap();
        let c = build(Some(&m), &HomotopyClass::Trivial, 1.44 * PI, &sp).unwrap();
        let (Ok(h0), Ok(h1)) = (tune(&c, &sp, a, 0.0), tune(&c, &sp, a, kappa)) else { return Ok(()) };
        if let Ok(r) = check_finely_tuned(&h0, Some(&h1), &c, &sp) {
            if r.finely_tuned {
                prop_assert!(r.delta_s > 0.0);
            }
        }
    }

    #[test]
    fn sandwich_holds_for_unit_minimum_factors(a in 0.005f64..0.1, frac in 0.1f64..0.9) {
        let s = ModelManifold::sphere(2);
        let f = ConformalFactor::new(&s, FactorSpec::Ellipsoid { weights: vec![1.0, 1.2] }).unwrap();
        let c = build(Some(&s), &HomotopyClass::Trivial, PI, &analytic_spectrum(&s, 7.0).unwrap()).unwrap();
        let lam = analytic_spectrum(&ModelManifold::ellipsoid(&[1.0, 1.2]).unwrap(), 10.0).unwrap();
        let b = PI * (1.44 + frac * 0.56);
        let opts = SandwichOptions { per_axis: 4, tau_points: 24, ..SandwichOptions::default() };
        let r = conformal_sandwich(&f, &Profile::new(a, b, 200.0).unwrap(), &lam, &c, &opts).unwrap();
        prop_assert!(r.window_ok);
        prop_assert!(r.sandwich.as_ref().unwrap().holds, "{:?}", r.sandwich);
        prop_assert!(r.pullback_log_residual < 1e-8);
    }
}

#[test]
fn abar_exceeds_its_closed_form_bound_for_the_sphere() {
    let m = ModelManifold::sphere(2);
    let sp = analytic_spectrum(&m, 7.0).unwrap();
    let c = build(Some(&m), &HomotopyClass::Trivial, PI, &sp).unwrap();
    let r = abar(&c, &sp, 0.0, None).unwrap();
    assert!(r.sampled > 0.0 && r.at_half.finely_tuned);
    assert!(r.proof <= r.sampled + 1e-6, "{} vs {}", r.proof, r.sampled);
}
