use std::f64::consts::TAU;

use proptest::prelude::*;
use reebkit::plug::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bump_properties_hold_for_every_epsilon(eps in 0.005f64..0.25, dim in prop::sample::select(vec![3usize, 5, 7])) {
        let spec = make_spec(eps, 1e-4 * eps, dim).unwrap();
        prop_assert!(spec.properties.all);
        prop_assert_eq!(spec.properties.samples, PROPERTY_SAMPLES);
    }

    #[test]
    fn contact_below_the_cap_fails_well_above_it(eps in 0.02f64..0.25) {
        let probe = make_spec(eps, 1e-6, 3).unwrap();
        let cap = delta_bound(&probe, &PlugGrid::coarse()).unwrap();
        prop_assert!((cap.analytic_cap * eps - 0.3268).abs() < 0.01, "{}", cap.analytic_cap * eps);
        prop_assert!(cap.grid_cap >= cap.analytic_cap);
        let grid = PlugGrid { tx: 128, rho: 8 };
        let inside = make_spec(eps, 0.5 * cap.analytic_cap, 3).unwrap();
        let c = verify_contact(&inside, &grid).unwrap();
        prop_assert!(c.positive && c.min_density > 0.0);
        let outside = make_spec(eps, 2.0 * cap.grid_cap, 3).unwrap();
        let broke = matches!(verify_contact(&outside, &grid), Err(PlugError::NotContact { .. }));
        prop_assert!(broke);
    }

    #[test]
    fn orbit_period_and_kernel(eps in 0.01f64..0.25, dim in prop::sample::select(vec![3usize, 5])) {
        let spec = make_spec(eps, 0.05 * eps, dim).unwrap();
        let o = locate_orbit(&spec, &PlugGrid { tx: 64, rho: 8 }).unwrap();
        let want = TAU * (eps + eps * eps);
        prop_assert!((o.period_quadrature - want).abs() < 1e-10);
        prop_assert!((o.period_reeb - want).abs() < 1e-9 * want);
        prop_assert!(o.kernel_ok && o.kernel_residual < 1e-8);
        prop_assert!(o.unique_on_grid);
    }

    #[test]
    fn gray_bound_dominates_the_grid_integral(eps in 0.01f64..0.2, ratio in 0.01f64..0.3) {
        let spec = make_spec(eps, ratio * eps, 3).unwrap();
        let g = gray_bounds(&spec, &GrayGrid { s: 8, space: PlugGrid { tx: 128, rho: 8 } }).unwrap();
        prop_assert!(g.max_rbar < g.rbar_bound && g.max_rhat < g.rhat_bound);
        prop_assert!(g.grid_factor_bound < g.factor_bound);
        // r̂ peaks at the orbit, where it equals ε/(1+ε) at s = 1
        prop_assert!((g.sup_rhat[g.sup_rhat.len() - 1] - eps / (1.0 + eps)).abs() < 1e-3 * eps);
    }
}

#[test]
fn chosen_parameters_are_round_and_certified() {
    let opts = ParameterOptions {
        contact_grid: PlugGrid { tx: 128, rho: 16 },
        gray_grid: Some(GrayGrid { s: 8, space: PlugGrid { tx: 128, rho: 8 } }),
        ..ParameterOptions::default()
    };
    for (c1, c2, eps) in [(0.25, 0.33, 0.05), (1.0, 0.7, 0.1), (0.01, 0.33, 0.002)] {
        let r = choose_parameters(c1, c2, 3, &opts).unwrap();
        assert_eq!(r.epsilon, eps, "({c1}, {c2})");
        assert!(2.0 * r.delta + 4.0 * r.epsilon < (1.0 + c1).ln());
        assert!(TAU * (r.epsilon + r.epsilon * r.epsilon) < c2);
        assert!(r.certificate.valid);
    }
    assert!(choose_parameters(-1.0, 0.3, 3, &opts).is_err());
}
