//! Simple pendulum with unit rod length and mass, `H(x, z) = z²/2 - g² cos x`,
//! advanced with the same explicit first-order scheme as the free-energy flow.

use serde::{Deserialize, Serialize};

use crate::arc_flow::{integrate_system, FirstOrderSystem, IntegratorConfig, Trajectory};
use crate::error::{Error, Result};

pub const STANDARD_GRAVITY: f64 = 9.80665;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendulumState {
    /// Angle in radians, unwrapped.
    pub angle: f64,
    pub momentum: f64,
    pub gravity: f64,
}

impl PendulumState {
    pub fn new(angle: f64, momentum: f64) -> Self {
        PendulumState { angle, momentum, gravity: STANDARD_GRAVITY }
    }

    pub fn is_finite(&self) -> bool {
        self.angle.is_finite() && self.momentum.is_finite() && self.gravity.is_finite()
    }

    /// Angle wrapped into `[-π, π)`, for plotting only.
    pub fn wrapped_angle(&self) -> f64 {
        use std::f64::consts::PI;
        (self.angle + PI).rem_euclid(2.0 * PI) - PI
    }
}

pub fn pendulum_energy(s: &PendulumState) -> f64 {
    0.5 * s.momentum * s.momentum - s.gravity * s.gravity * s.angle.cos()
}

/// `(dx/dt, dz/dt) = (z, -g² sin x)`.
pub fn pendulum_field(s: &PendulumState) -> (f64, f64) {
    (s.momentum, -s.gravity * s.gravity * s.angle.sin())
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Pendulum;

impl FirstOrderSystem for Pendulum {
    type State = PendulumState;

    fn step(&self, s: &PendulumState, delta: f64) -> Result<PendulumState> {
        let (dx, dz) = pendulum_field(s);
        let next = PendulumState { angle: s.angle + delta * dx, momentum: s.momentum + delta * dz, gravity: s.gravity };
        if !next.is_finite() {
            return Err(Error::NonFinite { index: 0, value: next.angle + next.momentum });
        }
        Ok(next)
    }

    fn energy(&self, s: &PendulumState) -> Result<f64> {
        Ok(pendulum_energy(s))
    }
}

pub fn integrate_pendulum(s0: &PendulumState, cfg: &IntegratorConfig) -> Result<Trajectory<PendulumState>> {
    if !s0.is_finite() {
        return Err(Error::NonFinite { index: 0, value: s0.angle + s0.momentum });
    }
    integrate_system(&Pendulum, s0, cfg, |_, _| Ok(()))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::arc_flow::{convergence_order, energy_drift};

    const G2: f64 = STANDARD_GRAVITY * STANDARD_GRAVITY;

    #[test]
    fn energy_examples() {
        assert!((pendulum_energy(&PendulumState::new(0.0, 0.0)) + 96.1703842225).abs() < 1e-9);
        assert!((pendulum_energy(&PendulumState::new(PI, 0.0)) - G2).abs() < 1e-12);
        assert!((pendulum_energy(&PendulumState::new(0.0, 1.0)) - (0.5 - G2)).abs() < 1e-12);
    }

    #[test]
    fn field_examples() {
        assert_eq!(pendulum_field(&PendulumState::new(0.0, 0.0)), (0.0, 0.0));
        let (dx, dz) = pendulum_field(&PendulumState::new(PI / 2.0, 0.0));
        assert_eq!(dx, 0.0);
        assert!((dz + G2).abs() < 1e-12);
        assert_eq!(pendulum_field(&PendulumState::new(0.0, 2.0)), (2.0, 0.0));
    }

    #[test]
    fn field_is_odd() {
        for (x, z) in [(0.3, -1.2), (2.0, 5.0), (-3.0, 0.25)] {
            let (a, b) = pendulum_field(&PendulumState::new(x, z));
            let (c, d) = pendulum_field(&PendulumState::new(-x, -z));
            assert_eq!((a, b), (-c, -d));
        }
    }

    #[test]
    fn bottom_equilibrium_is_a_fixed_point() {
        let cfg = IntegratorConfig::new(0.01, 5.0, vec![5.0]).unwrap();
        let traj = integrate_pendulum(&PendulumState::new(0.0, 0.0), &cfg).unwrap();
        assert_eq!(traj.snapshots[0].state, PendulumState::new(0.0, 0.0));
        assert_eq!(energy_drift(&traj).unwrap(), 0.0);
    }

    #[test]
    fn top_equilibrium_is_stationary_in_one_step() {
        // sin(π) is 1.2e-16 in floating point, so only the angle is exact.
        let s = Pendulum.step(&PendulumState::new(PI, 0.0), 0.001).unwrap();
        assert_eq!(s.angle, PI);
        assert!(s.momentum.abs() < 1e-15);
    }

    #[test]
    fn drift_is_first_order_and_monotone() {
        let rep = convergence_order(&Pendulum, &PendulumState::new(1.0, 0.0), &[0.004, 0.002, 0.001], 3.0).unwrap();
        assert!((0.8..=1.2).contains(&rep.order), "{rep:?}");
        assert!(rep.drifts.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn wrapping_is_cosmetic() {
        let s = PendulumState::new(3.0 * PI / 2.0, 0.0);
        assert!((s.wrapped_angle() + PI / 2.0).abs() < 1e-12);
    }
}
