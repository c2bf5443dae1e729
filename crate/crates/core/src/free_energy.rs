//! Minimum free energy, Gibbs posterior, conjugate potential and the
//! symplectic variation, plus the free-energy functional and KL divergence.
//!
//! Everything is computed from log-weights; the partition function `Z` is
//! only ever held as `log Z`.

use crate::error::{Error, Result};
use crate::grid_measure::{ensure_same_grid, integrate, Measure, Potential, State};
use crate::math::log_sum_exp_iter;

/// `log Z(f, P) = log Σ_i exp(-f(θᵢ)) Pᵢ`.
pub fn log_partition(f: &Potential, p: &Measure) -> Result<f64> {
    ensure_same_grid(f.grid(), p.grid())?;
    let lz = log_sum_exp_iter(p.log_weights().iter().zip(f.values()).map(|(lw, fv)| lw - fv));
    if lz == f64::NEG_INFINITY {
        return Err(Error::ZeroMass);
    }
    Ok(lz)
}

/// `H(f, P) = -log ∫ exp(-(f - ⟨f, P⟩)) dP`, evaluated as `-⟨f, P⟩ - log Z`.
///
/// The two forms agree for any positive measure, so `allow_nonprobability`
/// only lifts the probability requirement (used by the single-atom picture).
pub fn minimum_free_energy(f: &Potential, p: &Measure, allow_nonprobability: bool) -> Result<f64> {
    if p.total_mass() == 0.0 {
        return Err(Error::ZeroMass);
    }
    if !allow_nonprobability {
        p.ensure_probability()?;
    }
    let mean = integrate(f, p)?;
    Ok(-mean - log_partition(f, p)?)
}

/// `dP*/dP = exp(-f) / Z`.
pub fn gibbs_posterior(f: &Potential, p: &Measure) -> Result<Measure> {
    p.ensure_probability()?;
    posterior_unchecked(f, p)
}

fn posterior_unchecked(f: &Potential, p: &Measure) -> Result<Measure> {
    let lz = log_partition(f, p)?;
    let log_weights = p.log_weights().iter().zip(f.values()).map(|(lw, fv)| lw - fv - lz).collect();
    Measure::from_log_weights(p.grid().clone(), log_weights)
}

/// `f*(θ) = exp(-f(θ)) / Z`, strictly positive.
pub fn conjugate_potential(f: &Potential, p: &Measure) -> Result<Potential> {
    p.ensure_probability()?;
    conjugate_unchecked(f, p)
}

fn conjugate_unchecked(f: &Potential, p: &Measure) -> Result<Potential> {
    let lz = log_partition(f, p)?;
    Potential::new(f.grid().clone(), f.values().iter().map(|fv| (-fv - lz).exp()).collect())
}

/// The pair `(f* + f, P* - P)`, i.e. `(-∂₂H, ∂₁H)` at `(f, P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticVariation {
    pub f_dir: Potential,
    /// Signed weight vector `P* - P`; sums to zero for probability `P`.
    pub p_dir: Vec<f64>,
    pub f_star: Potential,
    pub p_star: Measure,
}

pub fn symplectic_variation(s: &State) -> Result<SymplecticVariation> {
    variation_unchecked(s.f(), s.p())
}

/// Same formulas for a positive, not necessarily normalised `P`. Only the
/// single-atom visualisation uses this.
pub fn symplectic_variation_extended(f: &Potential, p: &Measure) -> Result<SymplecticVariation> {
    if p.total_mass() == 0.0 {
        return Err(Error::ZeroMass);
    }
    variation_unchecked(f, p)
}

fn variation_unchecked(f: &Potential, p: &Measure) -> Result<SymplecticVariation> {
    let f_star = conjugate_unchecked(f, p)?;
    let p_star = posterior_unchecked(f, p)?;
    let f_dir = f_star.affine(1.0, f, 1.0)?;
    let p_dir = p_star
        .log_weights()
        .iter()
        .zip(p.log_weights())
        .map(|(a, b)| a.exp() - b.exp())
        .collect();
    Ok(SymplecticVariation { f_dir, p_dir, f_star, p_star })
}

/// `KL(Q, P) = Σ Qᵢ log(Qᵢ / Pᵢ)` with `0 log 0 = 0`. Rejects `Q` that put
/// mass where `P` has none.
pub fn kl_divergence(q: &Measure, p: &Measure) -> Result<f64> {
    ensure_same_grid(q.grid(), p.grid())?;
    let mut kl = 0.0;
    for (i, (&lq, &lp)) in q.log_weights().iter().zip(p.log_weights()).enumerate() {
        if lq == f64::NEG_INFINITY {
            continue;
        }
        if lp == f64::NEG_INFINITY {
            return Err(Error::NotAbsolutelyContinuous { index: i });
        }
        kl += lq.exp() * (lq - lp);
    }
    Ok(kl)
}

/// `𝓕(Q) = ⟨f, Q⟩ + KL(Q, P)`; with `centered` the potential is replaced by
/// `f - ⟨f, P⟩`.
pub fn free_energy_functional(q: &Measure, f: &Potential, p: &Measure, centered: bool) -> Result<f64> {
    q.ensure_probability()?;
    p.ensure_probability()?;
    let mut energy = integrate(f, q)?;
    if centered {
        energy -= integrate(f, p)?;
    }
    Ok(energy + kl_divergence(q, p)?)
}

/// `|H(f, P) - 𝓕(P*)|` for the centered potential; zero up to rounding.
pub fn donsker_varadhan_residual(s: &State) -> Result<f64> {
    let h = minimum_free_energy(s.f(), s.p(), false)?;
    let post = gibbs_posterior(s.f(), s.p())?;
    let fe = free_energy_functional(&post, s.f(), s.p(), true)?;
    Ok((h - fe).abs())
}
