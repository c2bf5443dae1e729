use archam_core::arc_flow::{convergence_order, energy_drift, integrate_flow, FreeEnergyFlow, IntegratorConfig};
use archam_core::free_energy::donsker_varadhan_residual;
use archam_core::grid_measure::{build_uniform_grid, DomainMode, WeightFn};
use archam_core::presets::{cauchy_location, default_grid, normal_location};
use archam_core::variation_oracle::{verify_first_variations, OracleConfig};

#[test]
fn normal_initial_state_satisfies_donsker_varadhan() {
    let s = normal_location(default_grid().unwrap()).unwrap();
    assert!(donsker_varadhan_residual(&s).unwrap() <= 1e-9);
    assert!((s.p().total_mass() - 1.0).abs() < 1e-6);
}

#[test]
fn presets_fail_strict_but_pass_warn() {
    let s = normal_location(default_grid().unwrap()).unwrap();
    let cfg = IntegratorConfig::new(0.1, 0.1, vec![]).unwrap();
    let w = WeightFn::default();
    assert!(integrate_flow(&s, &cfg, &w, DomainMode::Strict).is_err());
    assert!(integrate_flow(&s, &cfg, &w, DomainMode::Warn).is_ok());
}

#[test]
fn first_variations_on_a_coarse_normal_state() {
    let s = normal_location(build_uniform_grid(-10.0, 10.0, 200).unwrap()).unwrap();
    let cfg = OracleConfig::adapted_to(&s).unwrap();
    let rep = verify_first_variations(&s, 10, 1e-4, 1, &cfg).unwrap();
    assert!(rep.pass, "{} {}", rep.max_error_potential, rep.max_error_measure);
}

#[test]
fn drift_halves_with_step_on_both_location_models() {
    let grid = default_grid().unwrap();
    for s in [normal_location(grid.clone()).unwrap(), cauchy_location(grid.clone()).unwrap()] {
        let rep = convergence_order(&FreeEnergyFlow, &s, &[0.004, 0.002, 0.001], 3.0).unwrap();
        for pair in rep.drifts.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!((1.7..=2.3).contains(&ratio), "{rep:?}");
        }
    }
}

#[test]
fn flows_are_deterministic() {
    let s = cauchy_location(build_uniform_grid(-10.0, 10.0, 400).unwrap()).unwrap();
    let cfg = IntegratorConfig::new(0.01, 1.0, vec![0.0, 0.5, 1.0]).unwrap();
    let w = WeightFn::default();
    let a = integrate_flow(&s, &cfg, &w, DomainMode::Warn).unwrap();
    let b = integrate_flow(&s, &cfg, &w, DomainMode::Warn).unwrap();
    assert_eq!(a, b);
    assert!(energy_drift(&a).unwrap() < 1e-2);
    assert_eq!(a.metadata.grid.as_ref().unwrap().len, 400);
}
