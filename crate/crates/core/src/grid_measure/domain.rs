use serde::{Deserialize, Serialize};

use super::grid::WeightFn;
use super::measure::{ensure_same_grid, Measure, Potential, PROBABILITY_TOL};
use crate::error::{Error, Result};

/// How strictly the pointwise condition `f ≥ log w` is enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainMode {
    Strict,
    #[default]
    Warn,
    Off,
}

impl std::str::FromStr for DomainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(DomainMode::Strict),
            "warn" => Ok(DomainMode::Warn),
            "off" => Ok(DomainMode::Off),
            other => Err(Error::InvalidConfig(format!("unknown domain mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointViolation {
    pub index: usize,
    pub theta: f64,
    pub f: f64,
    pub log_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainReport {
    pub mode: DomainMode,
    /// False in `Off` mode, where the potential is not inspected.
    pub potential_checked: bool,
    pub violations: Vec<PointViolation>,
    pub total_mass: f64,
    pub is_probability: bool,
}

impl DomainReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty() && self.is_probability
    }
}

/// Checks `f(θᵢ) ≥ log w(θᵢ)` at every grid point and that `P` is a
/// probability measure. The mass check runs in every mode; a non-probability
/// `P` is always an error, pointwise violations only in `Strict` mode.
pub fn domain_check(f: &Potential, p: &Measure, w: &WeightFn, mode: DomainMode) -> Result<DomainReport> {
    ensure_same_grid(f.grid(), p.grid())?;
    let is_probability = (p.total_mass() - 1.0).abs() <= PROBABILITY_TOL;
    if !is_probability {
        return Err(Error::NotProbability { mass: p.total_mass() });
    }
    let mut violations = Vec::new();
    if mode != DomainMode::Off {
        for (i, (&theta, &fv)) in f.grid().points().iter().zip(f.values()).enumerate() {
            let log_w = w.eval(theta).ln();
            if fv < log_w {
                violations.push(PointViolation { index: i, theta, f: fv, log_w });
            }
        }
    }
    if mode == DomainMode::Strict && !violations.is_empty() {
        return Err(Error::DomainViolation { count: violations.len(), first: violations[0].index });
    }
    Ok(DomainReport {
        mode,
        potential_checked: mode != DomainMode::Off,
        violations,
        total_mass: p.total_mass(),
        is_probability,
    })
}
