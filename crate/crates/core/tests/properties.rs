use std::sync::Arc;

use archam_core::arc_flow::{arc_field, euler_step};
use archam_core::free_energy::{
    free_energy_functional, gibbs_posterior, log_partition, minimum_free_energy, symplectic_variation,
};
use archam_core::grid_measure::{integrate, product_metric, Grid, Measure, Potential, State, WeightFn};
use archam_core::variation_oracle::saddle_midpoint_check;
use proptest::prelude::*;

fn grid(n: usize) -> Arc<Grid> {
    Grid::finite_labels((0..n).map(|i| i as f64 - 2.0).collect()).unwrap()
}

fn potential(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..8.0f64, n)
}

fn probability(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01..1.0f64, n).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    })
}

fn state(n: usize) -> impl Strategy<Value = State> {
    (potential(n), probability(n)).prop_map(move |(f, p)| {
        let g = grid(n);
        State::new(Potential::new(g.clone(), f).unwrap(), Measure::from_weights(g, &p).unwrap()).unwrap()
    })
}

proptest! {
    #[test]
    fn metric_axioms(a in state(5), b in state(5), c in state(5), p in 0.0..4.0f64) {
        let w = WeightFn::new(p).unwrap();
        let ab = product_metric(&a, &b, &w).unwrap();
        let ba = product_metric(&b, &a, &w).unwrap();
        let bc = product_metric(&b, &c, &w).unwrap();
        let ac = product_metric(&a, &c, &w).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert_eq!(product_metric(&a, &a, &w).unwrap(), 0.0);
        if a != b {
            prop_assert!(ab > 0.0);
        }
    }

    #[test]
    fn quadrature_consistency(w in prop::collection::vec(0.0..3.0f64, 1..40)) {
        let g = grid(w.len());
        let m = Measure::from_weights(g.clone(), &w).unwrap();
        let one = Potential::constant(g, 1.0).unwrap();
        let total = integrate(&one, &m).unwrap();
        prop_assert!((total - m.total_mass()).abs() <= 1e-12 * m.total_mass().max(1e-300));
    }

    #[test]
    fn posterior_is_a_probability(s in state(6)) {
        let post = gibbs_posterior(s.f(), s.p()).unwrap();
        let w = post.weights();
        prop_assert!(w.iter().all(|x| *x >= 0.0));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn constant_shift_invariance(s in state(6), c in -50.0..50.0f64) {
        let shifted = s.f().shifted(c).unwrap();
        let a = gibbs_posterior(s.f(), s.p()).unwrap().weights();
        let b = gibbs_posterior(&shifted, s.p()).unwrap().weights();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        let h0 = minimum_free_energy(s.f(), s.p(), false).unwrap();
        let h1 = minimum_free_energy(&shifted, s.p(), false).unwrap();
        prop_assert!((h0 - h1).abs() <= 1e-9);
    }

    #[test]
    fn gibbs_variational_principle(s in state(6), q in probability(6)) {
        let q = Measure::from_weights(s.grid().clone(), &q).unwrap();
        let h = minimum_free_energy(s.f(), s.p(), false).unwrap();
        prop_assert!(free_energy_functional(&q, s.f(), s.p(), true).unwrap() >= h - 1e-9);
        let post = gibbs_posterior(s.f(), s.p()).unwrap();
        prop_assert!((free_energy_functional(&post, s.f(), s.p(), true).unwrap() - h).abs() <= 1e-9);
    }

    #[test]
    fn jensen_lower_bound(s in state(6)) {
        let lz = log_partition(s.f(), s.p()).unwrap();
        prop_assert!(lz >= -integrate(s.f(), s.p()).unwrap() - 1e-9);
    }

    #[test]
    fn saddle_inequalities(a in state(4), b in state(4), alpha in 0.0..=1.0f64) {
        let rep = saddle_midpoint_check(a.f(), b.f(), a.p(), b.p(), &[alpha]).unwrap();
        prop_assert!(rep.violations.is_empty(), "{:?}", rep.violations);
    }

    #[test]
    fn compatibility_sweep(s in state(6)) {
        let v = symplectic_variation(&s).unwrap();
        let p = s.p().weights();
        for k in 0..=10 {
            let step = k as f64 / 10.0;
            let moved: Vec<f64> = p.iter().zip(&v.p_dir).map(|(a, d)| a + step * d).collect();
            prop_assert!(moved.iter().all(|x| *x >= -1e-15));
            prop_assert!((moved.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            for (f, d) in s.f().values().iter().zip(v.f_dir.values()) {
                prop_assert!(f + step * d >= *f);
            }
        }
    }

    #[test]
    fn arc_field_matches_generic_update(s in state(6), step in 0.0..=1.0f64) {
        let v = symplectic_variation(&s).unwrap();
        let out = arc_field(&s, step).unwrap();
        for (i, got) in out.f().values().iter().enumerate() {
            let want = s.f().values()[i] + step * v.f_dir.values()[i];
            prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
        let pw = s.p().weights();
        for (i, got) in out.p().weights().iter().enumerate() {
            prop_assert!((got - (pw[i] + step * v.p_dir[i])).abs() <= 1e-12);
        }
    }

    #[test]
    fn steps_preserve_domain_and_grow_potential(s in state(6), delta in 1e-4..=1.0f64) {
        let next = euler_step(&s, delta).unwrap();
        prop_assert!((next.p().total_mass() - 1.0).abs() <= 1e-9);
        for (a, b) in s.f().values().iter().zip(next.f().values()) {
            prop_assert!(b >= a);
        }
    }
}
