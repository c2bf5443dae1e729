use std::sync::Arc;

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::math::{log_mix, log_sum_exp};

/// Tolerance on `|mass - 1|` for a measure to count as a probability.
pub const PROBABILITY_TOL: f64 = 1e-9;

pub(crate) fn same_grid(a: &Arc<Grid>, b: &Arc<Grid>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

pub(crate) fn ensure_same_grid(a: &Arc<Grid>, b: &Arc<Grid>) -> Result<()> {
    if same_grid(a, b) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// A potential (negative log-likelihood) sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl Potential {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i, value: values[i] });
        }
        Ok(Potential { grid, values })
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.points().iter().map(|&t| f(t)).collect();
        Potential::new(grid, values)
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Result<Self> {
        let values = vec![c; grid.len()];
        Potential::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise `a·self + b·other`.
    pub fn affine(&self, a: f64, other: &Potential, b: f64) -> Result<Potential> {
        ensure_same_grid(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Potential::new(self.grid.clone(), values)
    }

    pub fn shifted(&self, c: f64) -> Result<Potential> {
        Potential::new(self.grid.clone(), self.values.iter().map(|v| v + c).collect())
    }
}

/// A non-negative measure stored as log point masses on a grid.
///
/// Log-weights are the source of truth; `-inf` encodes zero mass. Linear
/// weights are derived on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    grid: Arc<Grid>,
    log_weights: Vec<f64>,
    total_mass: f64,
}

impl Measure {
    pub fn from_log_weights(grid: Arc<Grid>, log_weights: Vec<f64>) -> Result<Self> {
        if log_weights.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: log_weights.len() });
        }
        if let Some(i) = log_weights.iter().position(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::NonFinite { index: i, value: log_weights[i] });
        }
        let total_mass = log_sum_exp(&log_weights).exp();
        Ok(Measure { grid, log_weights, total_mass })
    }

    pub fn from_weights(grid: Arc<Grid>, weights: &[f64]) -> Result<Self> {
        if let Some(i) = weights.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i, value: weights[i] });
        }
        if let Some(i) = weights.iter().position(|&v| v < 0.0) {
            return Err(Error::NegativeDensity { index: i, value: weights[i] });
        }
        Measure::from_log_weights(grid, weights.iter().map(|w| w.ln()).collect())
    }

    /// Equal point masses `1/n`.
    pub fn uniform(grid: Arc<Grid>) -> Self {
        let lw = -(grid.len() as f64).ln();
        let log_weights = vec![lw; grid.len()];
        Measure { grid, log_weights, total_mass: 1.0 }
    }

    pub fn point_mass(grid: Arc<Grid>, index: usize) -> Result<Self> {
        if index >= grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: index + 1 });
        }
        let mut log_weights = vec![f64::NEG_INFINITY; grid.len()];
        log_weights[index] = 0.0;
        Ok(Measure { grid, log_weights, total_mass: 1.0 })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|lw| lw.exp()).collect()
    }

    /// Density view `weight / Δθ`.
    pub fn densities(&self) -> Vec<f64> {
        let dx = self.grid.cell_width();
        self.log_weights.iter().map(|lw| lw.exp() / dx).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn is_probability(&self) -> bool {
        (self.total_mass - 1.0).abs() <= PROBABILITY_TOL
    }

    pub fn ensure_probability(&self) -> Result<()> {
        if self.is_probability() {
            Ok(())
        } else {
            Err(Error::NotProbability { mass: self.total_mass })
        }
    }

    pub fn normalized(&self) -> Result<Measure> {
        let lz = log_sum_exp(&self.log_weights);
        if lz == f64::NEG_INFINITY {
            return Err(Error::ZeroMass);
        }
        let log_weights = self.log_weights.iter().map(|lw| lw - lz).collect();
        Measure::from_log_weights(self.grid.clone(), log_weights)
    }

    /// Convex combination `(1 - s)·self + s·other`, evaluated in log space.
    pub fn mix(&self, other: &Measure, s: f64) -> Result<Measure> {
        ensure_same_grid(&self.grid, &other.grid)?;
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::StepOutOfRange(s));
        }
        let log_weights = self
            .log_weights
            .iter()
            .zip(&other.log_weights)
            .map(|(&a, &b)| log_mix(a, b, s))
            .collect();
        Measure::from_log_weights(self.grid.clone(), log_weights)
    }

    /// Mean of θ under the normalised measure.
    pub fn mean(&self) -> f64 {
        let m: f64 = self
            .grid
            .points()
            .iter()
            .zip(&self.log_weights)
            .map(|(t, lw)| t * lw.exp())
            .sum();
        m / self.total_mass
    }
}

/// `⟨f, P⟩ = Σ f(θᵢ) Pᵢ`. For measures built by [`discretize_density`] this is
/// the left-endpoint quadrature of `∫ f p dθ`.
pub fn integrate(f: &Potential, p: &Measure) -> Result<f64> {
    ensure_same_grid(&f.grid, &p.grid)?;
    Ok(f.values.iter().zip(&p.log_weights).map(|(v, lw)| v * lw.exp()).sum())
}

/// Turns a density into point masses `density(θᵢ)·Δθ`. The result is not
/// renormalised.
pub fn discretize_density(grid: Arc<Grid>, density: impl Fn(f64) -> f64) -> Result<Measure> {
    let log_dx = grid.cell_width().ln();
    let mut log_weights = Vec::with_capacity(grid.len());
    for (i, &t) in grid.points().iter().enumerate() {
        let d = density(t);
        if d.is_nan() || d == f64::INFINITY {
            return Err(Error::NonFinite { index: i, value: d });
        }
        if d < 0.0 {
            return Err(Error::NegativeDensity { index: i, value: d });
        }
        log_weights.push(d.ln() + log_dx);
    }
    Measure::from_log_weights(grid, log_weights)
}

/// One point `(f, P)` of the state space: a potential and a probability
/// measure on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    f: Potential,
    p: Measure,
}

impl State {
    pub fn new(f: Potential, p: Measure) -> Result<Self> {
        ensure_same_grid(&f.grid, &p.grid)?;
        p.ensure_probability()?;
        Ok(State { f, p })
    }

    pub fn f(&self) -> &Potential {
        &self.f
    }

    pub fn p(&self) -> &Measure {
        &self.p
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.f.grid
    }

    pub fn into_parts(self) -> (Potential, Measure) {
        (self.f, self.p)
    }
}

#[cfg(test)]
mod tests {
    use super::super::grid::build_uniform_grid;
    use super::*;

    fn labels3() -> Arc<Grid> {
        Grid::finite_labels(vec![1.0, 2.0, 3.0]).unwrap()
    }

    #[test]
    fn integrate_examples() {
        let g = labels3();
        let p = Measure::uniform(g.clone());
        let c = Potential::constant(g.clone(), 4.25).unwrap();
        assert!((integrate(&c, &p).unwrap() - 4.25).abs() < 1e-15);

        let f = Potential::new(g.clone(), vec![2.0, 1.0, 0.5]).unwrap();
        assert!((integrate(&f, &p).unwrap() - 3.5 / 3.0).abs() < 1e-15);

        let g4 = build_uniform_grid(-1.0, 1.0, 4).unwrap();
        let id = Potential::from_fn(g4.clone(), |t| t).unwrap();
        let p4 = Measure::from_weights(g4, &[0.25; 4]).unwrap();
        assert!((integrate(&id, &p4).unwrap() + 0.25).abs() < 1e-15);
    }

    #[test]
    fn integrate_rejects_foreign_grid() {
        let f = Potential::constant(labels3(), 1.0).unwrap();
        let other = Grid::finite_labels(vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(integrate(&f, &Measure::uniform(other)), Err(Error::GridMismatch));
        // structurally equal grids are accepted
        assert!(integrate(&f, &Measure::uniform(labels3())).is_ok());
    }

    #[test]
    fn discretize_examples() {
        let g = build_uniform_grid(-10.0, 10.0, 2000).unwrap();
        let normal = discretize_density(g, |t| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()).unwrap();
        assert!((normal.total_mass() - 1.0).abs() < 1e-6);

        let unit = discretize_density(build_uniform_grid(0.0, 1.0, 1).unwrap(), |_| 1.0).unwrap();
        assert_eq!(unit.weights(), vec![1.0]);

        let half = discretize_density(build_uniform_grid(0.0, 2.0, 2).unwrap(), |_| 0.5).unwrap();
        assert_eq!(half.weights(), vec![0.5, 0.5]);
        assert!((half.total_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn discretize_rejects_negative_density() {
        let g = build_uniform_grid(0.0, 1.0, 4).unwrap();
        let err = discretize_density(g, |t| t - 0.3).unwrap_err();
        assert!(matches!(err, Error::NegativeDensity { index: 0, .. }));
    }

    #[test]
    fn zero_density_is_representable() {
        let g = build_uniform_grid(0.0, 1.0, 4).unwrap();
        let m = discretize_density(g, |t| if t < 0.5 { 0.0 } else { 2.0 }).unwrap();
        assert_eq!(m.weights(), vec![0.0, 0.0, 0.5, 0.5]);
        assert!(m.is_probability());
    }

    #[test]
    fn state_requires_probability_and_shared_grid() {
        let g = labels3();
        let f = Potential::constant(g.clone(), 0.0).unwrap();
        let half = Measure::from_weights(g.clone(), &[0.25, 0.25, 0.0]).unwrap();
        assert!(matches!(State::new(f.clone(), half), Err(Error::NotProbability { .. })));
        let other = Measure::uniform(Grid::finite_labels(vec![5.0, 6.0, 7.0]).unwrap());
        assert_eq!(State::new(f, other), Err(Error::GridMismatch));
    }

    #[test]
    fn mixture_stays_normalised() {
        let g = labels3();
        let a = Measure::uniform(g.clone());
        let b = Measure::point_mass(g, 2).unwrap();
        let m = a.mix(&b, 0.25).unwrap();
        let w = m.weights();
        assert!((w[0] - 0.25).abs() < 1e-15);
        assert!((w[2] - 0.75 / 3.0 - 0.25).abs() < 1e-15);
        assert!((m.total_mass() - 1.0).abs() < 1e-15);
        assert!(a.mix(&b, 1.5).is_err());
    }

    #[test]
    fn potential_rejects_nan_and_wrong_length() {
        let g = labels3();
        assert!(Potential::new(g.clone(), vec![1.0, f64::NAN, 0.0]).is_err());
        assert!(Potential::new(g, vec![1.0]).is_err());
    }
}
