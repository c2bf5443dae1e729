use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    FiniteLabels,
    Uniform1d,
}

/// A discretised parameter space: either a finite set of labelled points or
/// the left endpoints of a uniform partition of an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    kind: GridKind,
    points: Vec<f64>,
    cell_width: f64,
}

/// Serializable description of a grid, echoed into trajectory metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub kind: GridKind,
    pub len: usize,
    pub first: f64,
    pub last: f64,
    pub cell_width: f64,
}

/// Left-endpoint grid `min + i (max - min) / n`, `i = 0..n`. The right
/// endpoint is excluded.
pub fn build_uniform_grid(min: f64, max: f64, n: usize) -> Result<Arc<Grid>> {
    if !min.is_finite() || !max.is_finite() {
        return Err(Error::InvalidGrid(format!("non-finite bounds [{min}, {max}]")));
    }
    if min >= max {
        return Err(Error::InvalidGrid(format!("empty interval [{min}, {max}]")));
    }
    if n == 0 {
        return Err(Error::InvalidGrid("n must be at least 1".into()));
    }
    let cell_width = (max - min) / n as f64;
    let points = (0..n).map(|i| min + i as f64 * cell_width).collect();
    Ok(Arc::new(Grid { kind: GridKind::Uniform1d, points, cell_width }))
}

impl Grid {
    /// Finite label set with unit cell width, so weights are point masses.
    pub fn finite_labels(points: Vec<f64>) -> Result<Arc<Grid>> {
        if points.is_empty() {
            return Err(Error::InvalidGrid("label set is empty".into()));
        }
        if let Some(i) = points.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index: i, value: points[i] });
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid("labels must be strictly increasing".into()));
        }
        Ok(Arc::new(Grid { kind: GridKind::FiniteLabels, points, cell_width: 1.0 }))
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn cell_width(&self) -> f64 {
        self.cell_width
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            kind: self.kind,
            len: self.len(),
            first: self.points[0],
            last: self.points[self.len() - 1],
            cell_width: self.cell_width,
        }
    }
}

/// `w(θ) = 1 + |θ|^p`. The exponent `p = 0` is read as the unweighted case
/// `w ≡ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightFn {
    exponent: f64,
}

impl Default for WeightFn {
    fn default() -> Self {
        WeightFn { exponent: 2.0 }
    }
}

impl WeightFn {
    pub fn new(exponent: f64) -> Result<Self> {
        if !exponent.is_finite() || exponent < 0.0 {
            return Err(Error::InvalidConfig(format!("weight exponent {exponent} must be finite and >= 0")));
        }
        Ok(WeightFn { exponent })
    }

    pub fn unweighted() -> Self {
        WeightFn { exponent: 0.0 }
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn eval(&self, theta: f64) -> f64 {
        if self.exponent == 0.0 {
            1.0
        } else {
            1.0 + theta.abs().powf(self.exponent)
        }
    }

    pub fn on_grid(&self, grid: &Grid) -> Vec<f64> {
        grid.points().iter().map(|&t| self.eval(t)).collect()
    }
}
