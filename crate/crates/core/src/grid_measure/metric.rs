//! The weighted uniform metric on potentials, the weighted total variation
//! metric on measures, and their sum on states.

use super::grid::{Grid, WeightFn};
use super::measure::{ensure_same_grid, Measure, Potential, State};
use crate::error::{Error, Result};

/// `max_i |f(θᵢ) - g(θᵢ)| / w(θᵢ)`.
pub fn weighted_sup_metric(f: &Potential, g: &Potential, w: &WeightFn) -> Result<f64> {
    ensure_same_grid(f.grid(), g.grid())?;
    Ok(f.grid()
        .points()
        .iter()
        .zip(f.values().iter().zip(g.values()))
        .map(|(&t, (a, b))| (a - b).abs() / w.eval(t))
        .fold(0.0, f64::max))
}

/// `Σ_i w(θᵢ) |Pᵢ - Qᵢ|`.
pub fn weighted_tv_metric(p: &Measure, q: &Measure, w: &WeightFn) -> Result<f64> {
    ensure_same_grid(p.grid(), q.grid())?;
    weighted_l1(p.grid(), &p.weights(), &q.weights(), w)
}

/// Weighted total variation between two raw (possibly signed) weight vectors.
pub fn weighted_l1(grid: &Grid, a: &[f64], b: &[f64], w: &WeightFn) -> Result<f64> {
    if a.len() != grid.len() || b.len() != grid.len() {
        return Err(Error::LengthMismatch { expected: grid.len(), got: a.len().min(b.len()) });
    }
    Ok(grid
        .points()
        .iter()
        .zip(a.iter().zip(b))
        .map(|(&t, (x, y))| w.eval(t) * (x - y).abs())
        .sum())
}

/// `d((f, P), (g, Q)) = ϱ(f, g) + γ(P, Q)`.
pub fn product_metric(a: &State, b: &State, w: &WeightFn) -> Result<f64> {
    Ok(weighted_sup_metric(a.f(), b.f(), w)? + weighted_tv_metric(a.p(), b.p(), w)?)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;

    fn labels(xs: &[f64]) -> Arc<Grid> {
        Grid::finite_labels(xs.to_vec()).unwrap()
    }

    #[test]
    fn sup_metric_examples() {
        let g = labels(&[-1.0, 0.0, 2.0]);
        let f = Potential::new(g.clone(), vec![1.0, 2.0, 3.0]).unwrap();
        let w = WeightFn::default();
        assert_eq!(weighted_sup_metric(&f, &f, &w).unwrap(), 0.0);

        let h = f.shifted(1.0).unwrap();
        assert_eq!(weighted_sup_metric(&f, &h, &w).unwrap(), 1.0);

        let g2 = labels(&[0.0, 1.0]);
        let a = Potential::new(g2.clone(), vec![1.0, 2.0]).unwrap();
        let z = Potential::constant(g2, 0.0).unwrap();
        assert_eq!(weighted_sup_metric(&a, &z, &w).unwrap(), 1.0);
    }

    #[test]
    fn tv_metric_examples() {
        let g = labels(&[1.0, 2.0, 3.0]);
        let p = Measure::uniform(g.clone());
        let q = Measure::point_mass(g, 0).unwrap();
        assert_eq!(weighted_tv_metric(&p, &p, &WeightFn::default()).unwrap(), 0.0);
        let d = weighted_tv_metric(&p, &q, &WeightFn::unweighted()).unwrap();
        assert!((d - 4.0 / 3.0).abs() < 1e-15);

        let g2 = labels(&[0.0, 1.0]);
        let a = Measure::point_mass(g2.clone(), 0).unwrap();
        let b = Measure::point_mass(g2, 1).unwrap();
        assert_eq!(weighted_tv_metric(&a, &b, &WeightFn::default()).unwrap(), 3.0);
    }

    #[test]
    fn product_metric_reduces_to_components() {
        let g = labels(&[1.0, 2.0, 3.0]);
        let w = WeightFn::default();
        let f = Potential::new(g.clone(), vec![2.0, 1.0, 0.5]).unwrap();
        let h = Potential::new(g.clone(), vec![0.0, 1.0, 4.0]).unwrap();
        let p = Measure::uniform(g.clone());
        let q = Measure::from_weights(g, &[0.2, 0.3, 0.5]).unwrap();
        let fp = State::new(f.clone(), p.clone()).unwrap();
        let hp = State::new(h.clone(), p.clone()).unwrap();
        let fq = State::new(f.clone(), q.clone()).unwrap();
        assert_eq!(product_metric(&fp, &fp, &w).unwrap(), 0.0);
        assert_eq!(product_metric(&fp, &hp, &w).unwrap(), weighted_sup_metric(&f, &h, &w).unwrap());
        assert_eq!(product_metric(&fp, &fq, &w).unwrap(), weighted_tv_metric(&p, &q, &w).unwrap());
    }
}
