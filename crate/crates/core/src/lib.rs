//! Arc Hamiltonian flows of the minimum free energy of Bayesian inference.
//!
//! States are pairs `(f, P)` of a negative log-likelihood and a prior on a
//! discretised parameter space. The minimum free energy
//! `H(f, P) = -log ∫ exp(-(f - ⟨f, P⟩)) dP` generates the flow
//! `(f, P) ← ((1 + δ) f + δ f*, (1 - δ) P + δ P*)`, where `P*` is the Gibbs
//! posterior and `f* = dP*/dP`. `H` is conserved along the exact flow; the
//! crate integrates it with the explicit first-order scheme and provides
//! diagnostics that check the analytic claims numerically.

pub mod arc_flow;
pub mod error;
pub mod free_energy;
pub mod grid_measure;
pub mod math;
pub mod pendulum;
pub mod presets;
pub mod variation_oracle;

pub use error::{Error, Result};
