//! Grids, potentials, measures, the duality pairing, weight function,
//! domain checks and the metrics on the state space.

mod domain;
mod grid;
mod measure;
mod metric;

pub use domain::{domain_check, DomainMode, DomainReport, PointViolation};
pub use grid::{build_uniform_grid, Grid, GridKind, GridSpec, WeightFn};
pub use measure::{discretize_density, integrate, Measure, Potential, State, PROBABILITY_TOL};
pub use metric::{product_metric, weighted_l1, weighted_sup_metric, weighted_tv_metric};

pub(crate) use measure::ensure_same_grid;

impl State {
    pub fn domain_check(&self, w: &WeightFn, mode: DomainMode) -> crate::Result<DomainReport> {
        domain_check(self.f(), self.p(), w, mode)
    }
}
