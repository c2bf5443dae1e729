//! Finite-difference verification of the first variations and numerical
//! probes of the saddle property and local Lipschitz continuity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::free_energy::{minimum_free_energy, symplectic_variation};
use crate::grid_measure::{
    ensure_same_grid, product_metric, weighted_l1, weighted_sup_metric, weighted_tv_metric, DomainMode, Measure,
    Potential, State, WeightFn,
};

/// Slack allowed on the saddle inequalities.
pub const SADDLE_SLACK: f64 = 1e-9;

/// An admissible direction at a state: either a potential increment `g`
/// (moving `f` to `f + λg`) or a target probability `Q` (moving `P` along
/// `P + λ(Q - P)`).
#[derive(Debug, Clone, PartialEq)]
pub enum DirectionSpec {
    Potential(Potential),
    Measure(Measure),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub epsilons: Vec<f64>,
    pub weight: WeightFn,
    /// `Strict` requires `f + εg ≥ log w`, `Warn` only `f + εg ≥ 0`, `Off`
    /// skips the potential check.
    pub mode: DomainMode,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { epsilons: vec![1e-3, 5e-4, 2.5e-4], weight: WeightFn::default(), mode: DomainMode::Warn }
    }
}

impl OracleConfig {
    /// Default ladder shrunk by `max(1, ‖f*‖∞)`. Along a measure direction the
    /// quotient expands in powers of `ε⟨f*, Q - P⟩`, so peaked posteriors on
    /// fine grids need proportionally smaller steps.
    pub fn adapted_to(s: &State) -> Result<Self> {
        let var = symplectic_variation(s)?;
        let scale = var.f_star.values().iter().copied().fold(1.0, f64::max);
        let base = OracleConfig::default();
        Ok(OracleConfig { epsilons: base.epsilons.iter().map(|e| e / scale).collect(), ..base })
    }

    pub fn with_epsilons(mut self, epsilons: Vec<f64>) -> Self {
        self.epsilons = epsilons;
        self
    }
}

fn check_admissible(s: &State, dir: &DirectionSpec, eps: f64, cfg: &OracleConfig) -> Result<()> {
    match dir {
        DirectionSpec::Potential(g) => {
            ensure_same_grid(s.grid(), g.grid())?;
            if cfg.mode == DomainMode::Off {
                return Ok(());
            }
            let pts = s.grid().points();
            for (i, (fv, gv)) in s.f().values().iter().zip(g.values()).enumerate() {
                let floor = match cfg.mode {
                    DomainMode::Strict => cfg.weight.eval(pts[i]).ln(),
                    _ => 0.0,
                };
                if fv + eps * gv < floor {
                    return Err(Error::InadmissibleDirection(format!("f + {eps}·g drops below {floor} at index {i}")));
                }
            }
            Ok(())
        }
        DirectionSpec::Measure(q) => {
            ensure_same_grid(s.grid(), q.grid())?;
            if !q.is_probability() {
                return Err(Error::InadmissibleDirection(format!("target has mass {}", q.total_mass())));
            }
            if eps > 1.0 {
                return Err(Error::InadmissibleDirection(format!("step {eps} leaves the simplex")));
            }
            Ok(())
        }
    }
}

fn energy_along(s: &State, dir: &DirectionSpec, eps: f64) -> Result<f64> {
    match dir {
        DirectionSpec::Potential(g) => minimum_free_energy(&s.f().affine(1.0, g, eps)?, s.p(), false),
        DirectionSpec::Measure(q) => minimum_free_energy(s.f(), &s.p().mix(q, eps)?, false),
    }
}

/// Extrapolates `values[i] ≈ D + c₁ εᵢ + c₂ εᵢ² + …` to `ε = 0` with
/// Neville's scheme (repeated Richardson for arbitrary ratios).
pub fn richardson_to_zero(eps: &[f64], values: &[f64]) -> f64 {
    let mut t = values.to_vec();
    let n = t.len();
    for m in 1..n {
        for i in 0..n - m {
            t[i] = (eps[i] * t[i + 1] - eps[i + m] * t[i]) / (eps[i] - eps[i + m]);
        }
    }
    t[0]
}

/// One-sided difference quotients `(H(s + ε·dir) - H(s)) / ε`, extrapolated
/// to `ε → 0⁺`.
pub fn fd_directional_derivative(s: &State, dir: &DirectionSpec, cfg: &OracleConfig) -> Result<f64> {
    let eps = &cfg.epsilons;
    if eps.is_empty() || eps.iter().any(|e| e.is_nan() || *e <= 0.0) || eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidConfig("epsilons must be positive and strictly decreasing".into()));
    }
    check_admissible(s, dir, eps[0], cfg)?;
    let h0 = minimum_free_energy(s.f(), s.p(), false)?;
    let quotients = eps
        .iter()
        .map(|&e| Ok((energy_along(s, dir, e)? - h0) / e))
        .collect::<Result<Vec<_>>>()?;
    Ok(richardson_to_zero(eps, &quotients))
}

/// Pairing of the direction with the analytic first variation:
/// `⟨g, P* - P⟩` or `⟨-f* - f, Q - P⟩`.
pub fn analytic_directional_derivative(s: &State, dir: &DirectionSpec) -> Result<f64> {
    let var = symplectic_variation(s)?;
    match dir {
        DirectionSpec::Potential(g) => {
            ensure_same_grid(s.grid(), g.grid())?;
            Ok(g.values().iter().zip(&var.p_dir).map(|(a, b)| a * b).sum())
        }
        DirectionSpec::Measure(q) => {
            ensure_same_grid(s.grid(), q.grid())?;
            Ok(var
                .f_dir
                .values()
                .iter()
                .zip(q.weights().iter().zip(s.p().weights()))
                .map(|(fd, (qw, pw))| -fd * (qw - pw))
                .sum())
        }
    }
}

/// Random non-negative bump `a·exp(-(θ - c)² / 2σ²)`, scaled to at most 1.
pub fn random_potential_direction<R: Rng>(s: &State, rng: &mut R) -> Result<Potential> {
    let pts = s.grid().points();
    let (lo, hi) = (pts[0], pts[pts.len() - 1]);
    let span = (hi - lo).max(1.0);
    let center = lo + rng.random::<f64>() * (hi - lo);
    let width = span * (0.02 + 0.5 * rng.random::<f64>());
    let amp = 0.1 + 0.9 * rng.random::<f64>();
    Potential::from_fn(s.grid().clone(), |t| amp * (-((t - center) / width).powi(2) / 2.0).exp())
}

/// Flat-Dirichlet draw on the grid.
pub fn random_probability<R: Rng>(grid: &std::sync::Arc<crate::grid_measure::Grid>, rng: &mut R) -> Result<Measure> {
    let draws: Vec<f64> = (0..grid.len()).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    Measure::from_weights(grid.clone(), &draws.iter().map(|d| d / total).collect::<Vec<_>>())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionCheck {
    pub kind: &'static str,
    pub fd: f64,
    pub analytic: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationReport {
    pub seed: u64,
    /// Directions sampled per kind; a finite sample, not an exhaustive check.
    pub n_directions: usize,
    pub tolerance: f64,
    pub max_error_potential: f64,
    pub max_error_measure: f64,
    pub checks: Vec<DirectionCheck>,
    pub pass: bool,
}

/// Compares finite differences against the analytic pairings over
/// `n_directions` random admissible directions of each kind.
pub fn verify_first_variations(
    s: &State,
    n_directions: usize,
    tolerance: f64,
    seed: u64,
    cfg: &OracleConfig,
) -> Result<VariationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::with_capacity(2 * n_directions);
    for _ in 0..n_directions {
        let dir = DirectionSpec::Potential(random_potential_direction(s, &mut rng)?);
        checks.push(one_check("potential", s, &dir, cfg)?);
        let dir = DirectionSpec::Measure(random_probability(s.grid(), &mut rng)?);
        checks.push(one_check("measure", s, &dir, cfg)?);
    }
    let max_of = |kind: &str| checks.iter().filter(|c| c.kind == kind).map(|c| c.abs_error).fold(0.0, f64::max);
    let max_error_potential = max_of("potential");
    let max_error_measure = max_of("measure");
    Ok(VariationReport {
        seed,
        n_directions,
        tolerance,
        max_error_potential,
        max_error_measure,
        pass: max_error_potential <= tolerance && max_error_measure <= tolerance,
        checks,
    })
}

fn one_check(kind: &'static str, s: &State, dir: &DirectionSpec, cfg: &OracleConfig) -> Result<DirectionCheck> {
    let fd = fd_directional_derivative(s, dir, cfg)?;
    let analytic = analytic_directional_derivative(s, dir)?;
    Ok(DirectionCheck { kind, fd, analytic, abs_error: (fd - analytic).abs() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaddleViolation {
    pub alpha: f64,
    /// `"concave-in-f"` or `"convex-in-P"`.
    pub inequality: &'static str,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaddleReport {
    pub n_checks: usize,
    /// Largest signed excess over both inequalities; `≤ 0` means both hold
    /// without slack.
    pub max_excess: f64,
    pub violations: Vec<SaddleViolation>,
}

/// Checks `H(αf + (1-α)g, P) ≥ αH(f, P) + (1-α)H(g, P)` and
/// `H(f, αP + (1-α)Q) ≤ αH(f, P) + (1-α)H(f, Q)` for each `α`.
pub fn saddle_midpoint_check(
    f: &Potential,
    g: &Potential,
    p: &Measure,
    q: &Measure,
    alphas: &[f64],
) -> Result<SaddleReport> {
    let h = |f: &Potential, p: &Measure| minimum_free_energy(f, p, false);
    let (hfp, hgp, hfq) = (h(f, p)?, h(g, p)?, h(f, q)?);
    let mut violations = Vec::new();
    let mut max_excess = f64::NEG_INFINITY;
    for &alpha in alphas {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::StepOutOfRange(alpha));
        }
        let mid_f = f.affine(alpha, g, 1.0 - alpha)?;
        let excess = alpha * hfp + (1.0 - alpha) * hgp - h(&mid_f, p)?;
        max_excess = max_excess.max(excess);
        if excess > SADDLE_SLACK {
            violations.push(SaddleViolation { alpha, inequality: "concave-in-f", excess });
        }
        let mid_p = q.mix(p, alpha)?;
        let excess = h(f, &mid_p)? - (alpha * hfp + (1.0 - alpha) * hfq);
        max_excess = max_excess.max(excess);
        if excess > SADDLE_SLACK {
            violations.push(SaddleViolation { alpha, inequality: "convex-in-P", excess });
        }
    }
    Ok(SaddleReport { n_checks: 2 * alphas.len(), max_excess, violations })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzReport {
    pub radius: f64,
    pub pairs_used: usize,
    pub pairs_skipped: usize,
    pub max_ratio: f64,
}

/// Samples state pairs in the `d`-ball of `radius` around `center` and
/// returns the largest `d*(∂H(a), ∂H(b)) / d(a, b)`, with `d*` the same
/// weighted metrics applied to the symplectic-variation components.
pub fn lipschitz_probe(center: &State, radius: f64, n_pairs: usize, seed: u64, w: &WeightFn) -> Result<LipschitzReport> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidConfig(format!("radius {radius} must be positive")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut used, mut skipped, mut max_ratio) = (0, 0, 0.0f64);
    for _ in 0..n_pairs {
        let a = perturb(center, radius / 2.0, w, &mut rng)?;
        let b = perturb(center, radius / 2.0, w, &mut rng)?;
        let d = product_metric(&a, &b, w)?;
        if d == 0.0 {
            skipped += 1;
            continue;
        }
        let (va, vb) = (symplectic_variation(&a)?, symplectic_variation(&b)?);
        let d_star = weighted_sup_metric(&va.f_dir, &vb.f_dir, w)? + weighted_l1(center.grid(), &va.p_dir, &vb.p_dir, w)?;
        max_ratio = max_ratio.max(d_star / d);
        used += 1;
    }
    Ok(LipschitzReport { radius, pairs_used: used, pairs_skipped: skipped, max_ratio })
}

// Draws a state within distance `half` of `center`: a potential shift with
// weighted sup norm below `half / 2` and a mixture toward a random
// probability with weighted TV below `half / 2`. Shifts that would push f
// negative are resampled.
fn perturb<R: Rng>(center: &State, half: f64, w: &WeightFn, rng: &mut R) -> Result<State> {
    let pts = center.grid().points();
    let f = loop {
        let values: Vec<f64> = center
            .f()
            .values()
            .iter()
            .zip(pts)
            .map(|(fv, &t)| fv + (rng.random::<f64>() * 2.0 - 1.0) * 0.5 * half * w.eval(t))
            .collect();
        if values.iter().all(|v| *v >= 0.0) || center.f().values().iter().any(|v| *v < 0.0) {
            break Potential::new(center.grid().clone(), values)?;
        }
    };
    let q = random_probability(center.grid(), rng)?;
    let tv = weighted_tv_metric(center.p(), &q, w)?;
    let eta = if tv > 0.0 { (0.5 * half / tv).min(1.0) * rng.random::<f64>() } else { 0.0 };
    State::new(f, center.p().mix(&q, eta)?)
}
