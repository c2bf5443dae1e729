//! Initial states of the reference experiments.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::Result;
use crate::grid_measure::{build_uniform_grid, discretize_density, Grid, Measure, Potential, State};

pub const DATUM: f64 = 5.0;
pub const GRID_MIN: f64 = -10.0;
pub const GRID_MAX: f64 = 10.0;
pub const GRID_N: usize = 2000;
pub const SIMPLEX3_POTENTIAL: [f64; 3] = [2.0, 1.0, 0.5];

pub fn standard_normal_density(theta: f64) -> f64 {
    (-theta * theta / 2.0).exp() / (2.0 * PI).sqrt()
}

/// Negative log-likelihood of `N(θ, 1)` at the datum.
pub fn normal_nll(theta: f64) -> f64 {
    (DATUM - theta).powi(2) / 2.0 + (2.0 * PI).ln() / 2.0
}

/// Negative log-likelihood of the Cauchy location model at the datum.
pub fn cauchy_nll(theta: f64) -> f64 {
    (1.0 + (DATUM - theta).powi(2)).ln() + PI.ln()
}

pub fn default_grid() -> Result<Arc<Grid>> {
    build_uniform_grid(GRID_MIN, GRID_MAX, GRID_N)
}

/// `(f₀, p₀)` with `p₀` the standard normal density discretised on `grid`.
/// The prior is not renormalised; grids whose quadrature misses unit mass by
/// more than the probability tolerance are rejected.
pub fn location_state(grid: Arc<Grid>, nll: impl Fn(f64) -> f64) -> Result<State> {
    let prior = discretize_density(grid.clone(), standard_normal_density)?;
    State::new(Potential::from_fn(grid, nll)?, prior)
}

pub fn normal_location(grid: Arc<Grid>) -> Result<State> {
    location_state(grid, normal_nll)
}

pub fn cauchy_location(grid: Arc<Grid>) -> Result<State> {
    location_state(grid, cauchy_nll)
}

/// Labels `{1, 2, 3}` with `f₀ = (2.0, 1.0, 0.5)` and the uniform prior.
pub fn simplex3() -> Result<State> {
    let grid = Grid::finite_labels(vec![1.0, 2.0, 3.0])?;
    State::new(Potential::new(grid.clone(), SIMPLEX3_POTENTIAL.to_vec())?, Measure::uniform(grid))
}
