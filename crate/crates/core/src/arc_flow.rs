//! The Hamiltonian arc field of the minimum free energy and its first-order
//! discretisation, with trajectory recording and energy diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::free_energy::{minimum_free_energy, symplectic_variation};
use crate::grid_measure::{product_metric, DomainMode, GridSpec, Measure, State, WeightFn};
use crate::math::ls_slope;

/// Mass deviation above which a stepped measure is renormalised.
pub const RENORMALISE_TOL: f64 = 1e-12;
/// Mass deviation above which stepping aborts.
pub const MASS_ABORT_TOL: f64 = 1e-9;

/// Drifts at or below `DRIFT_FLOOR · max(1, |H(0)|)` count as zero when
/// estimating convergence order.
pub const DRIFT_FLOOR: f64 = 1e-12;

/// A system advanced by the explicit scheme `x ← x + δ·∂H(x)`.
pub trait FirstOrderSystem {
    type State: Clone;

    fn step(&self, state: &Self::State, delta: f64) -> Result<Self::State>;

    fn energy(&self, state: &Self::State) -> Result<f64>;
}

/// The minimum-free-energy system on `(f, P)` states.
#[derive(Debug, Clone, Copy, Default)]
pub struct FreeEnergyFlow;

impl FirstOrderSystem for FreeEnergyFlow {
    type State = State;

    fn step(&self, state: &State, delta: f64) -> Result<State> {
        euler_step(state, delta)
    }

    fn energy(&self, state: &State) -> Result<f64> {
        minimum_free_energy(state.f(), state.p(), false)
    }
}

/// `Φ_s(f, P) = ((1 + s) f + s f*, (1 - s) P + s P*)`.
pub fn arc_field(state: &State, step: f64) -> Result<State> {
    if !(0.0..=1.0).contains(&step) {
        return Err(Error::StepOutOfRange(step));
    }
    if step == 0.0 {
        return Ok(state.clone());
    }
    let var = symplectic_variation(state)?;
    let f = state.f().affine(1.0 + step, &var.f_star, step)?;
    let p = settle_mass(state.p().mix(&var.p_star, step)?)?;
    State::new(f, p)
}

// Convex combinations of probabilities cannot leave the simplex; anything
// beyond rounding is a bug upstream.
fn settle_mass(p: Measure) -> Result<Measure> {
    let dev = (p.total_mass() - 1.0).abs();
    if dev.is_nan() || dev > MASS_ABORT_TOL {
        return Err(Error::NotProbability { mass: p.total_mass() });
    }
    if dev > RENORMALISE_TOL {
        return p.normalized();
    }
    Ok(p)
}

/// One step of the first-order scheme; same map as [`arc_field`] with
/// `0 < delta ≤ 1`.
pub fn euler_step(state: &State, delta: f64) -> Result<State> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::StepOutOfRange(delta));
    }
    arc_field(state, delta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub delta: f64,
    pub t_max: f64,
    pub snapshot_times: Vec<f64>,
    pub record_energy_every: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { delta: 0.001, t_max: 3.0, snapshot_times: vec![0.0, 1.0, 2.0, 3.0], record_energy_every: 1 }
    }
}

impl IntegratorConfig {
    pub fn new(delta: f64, t_max: f64, snapshot_times: Vec<f64>) -> Result<Self> {
        let cfg = IntegratorConfig { delta, t_max, snapshot_times, record_energy_every: 1 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::InvalidConfig(format!("delta {} must lie in (0, 1]", self.delta)));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidConfig(format!("t_max {} must be finite and >= 0", self.t_max)));
        }
        if self.record_energy_every == 0 {
            return Err(Error::InvalidConfig("record_energy_every must be positive".into()));
        }
        if let Some(t) = self.snapshot_times.iter().find(|t| !(**t >= 0.0 && **t <= self.t_max)) {
            return Err(Error::InvalidConfig(format!("snapshot time {t} outside [0, {}]", self.t_max)));
        }
        let steps = self.snapshot_steps();
        if steps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("snapshot times must map to strictly increasing steps".into()));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_max / self.delta).round() as usize
    }

    /// Snapshot time `t` maps to step `round(t / δ)`.
    pub fn snapshot_steps(&self) -> Vec<usize> {
        self.snapshot_times.iter().map(|t| (t / self.delta).round() as usize).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<S> {
    pub step: usize,
    /// `step · δ`, never an accumulated sum.
    pub t: f64,
    pub state: S,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryMeta {
    pub config: IntegratorConfig,
    pub grid: Option<GridSpec>,
    pub weight_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub snapshots: Vec<Snapshot<S>>,
    /// `(t, H)` pairs at the configured cadence, always including both ends.
    pub energy_series: Vec<(f64, f64)>,
    pub metadata: TrajectoryMeta,
}

/// Runs the explicit scheme from `s0` for `round(t_max / δ)` steps. The
/// observer sees every state, including `s0` at step 0, and may abort the run.
pub fn integrate_system<Sys, F>(
    system: &Sys,
    s0: &Sys::State,
    cfg: &IntegratorConfig,
    mut observer: F,
) -> Result<Trajectory<Sys::State>>
where
    Sys: FirstOrderSystem,
    F: FnMut(usize, &Sys::State) -> Result<()>,
{
    cfg.validate()?;
    let n = cfg.n_steps();
    let snap_steps = cfg.snapshot_steps();
    let mut next_snap = 0;
    let mut snapshots = Vec::with_capacity(snap_steps.len());
    let mut energy_series = Vec::new();

    let mut state = s0.clone();
    for k in 0..=n {
        if k > 0 {
            state = system.step(&state, cfg.delta).map_err(|e| abort(k, e))?;
        }
        observer(k, &state)?;
        let t = k as f64 * cfg.delta;
        if k % cfg.record_energy_every == 0 || k == n {
            let h = system.energy(&state).map_err(|e| abort(k, e))?;
            if !h.is_finite() {
                return Err(Error::NumericAbort { step: k, reason: format!("energy is {h}") });
            }
            energy_series.push((t, h));
        }
        while next_snap < snap_steps.len() && snap_steps[next_snap] == k {
            snapshots.push(Snapshot { step: k, t, state: state.clone() });
            next_snap += 1;
        }
    }
    Ok(Trajectory {
        snapshots,
        energy_series,
        metadata: TrajectoryMeta { config: cfg.clone(), grid: None, weight_p: None },
    })
}

fn abort(step: usize, e: Error) -> Error {
    match e {
        Error::NumericAbort { .. } => e,
        other => Error::NumericAbort { step, reason: other.to_string() },
    }
}

/// Integrates the minimum-free-energy flow after checking `s0` against the
/// domain in the given mode.
pub fn integrate_flow(s0: &State, cfg: &IntegratorConfig, w: &WeightFn, mode: DomainMode) -> Result<Trajectory<State>> {
    integrate_flow_observed(s0, cfg, w, mode, |_, _| Ok(()))
}

pub fn integrate_flow_observed<F>(
    s0: &State,
    cfg: &IntegratorConfig,
    w: &WeightFn,
    mode: DomainMode,
    observer: F,
) -> Result<Trajectory<State>>
where
    F: FnMut(usize, &State) -> Result<()>,
{
    s0.domain_check(w, mode)?;
    let mut traj = integrate_system(&FreeEnergyFlow, s0, cfg, observer)?;
    traj.metadata.grid = Some(s0.grid().spec());
    traj.metadata.weight_p = Some(w.exponent());
    Ok(traj)
}

/// `max_t |H(t) - H(0)|` over the recorded energy series.
pub fn energy_drift<S>(traj: &Trajectory<S>) -> Result<f64> {
    let (_, h0) = *traj.energy_series.first().ok_or(Error::EmptySeries)?;
    Ok(traj.energy_series.iter().map(|(_, h)| (h - h0).abs()).fold(0.0, f64::max))
}

/// For each `s`, integrates a reference flow to time `s` with `ref_steps`
/// Euler sub-steps (`ref_delta = s / ref_steps`) and returns
/// `(s, d(reference, Φ_s(s0)) / s)`.
pub fn arc_residual(s0: &State, s_values: &[f64], ref_steps: usize, w: &WeightFn) -> Result<Vec<(f64, f64)>> {
    if ref_steps == 0 {
        return Err(Error::InvalidConfig("ref_steps must be positive".into()));
    }
    s_values
        .iter()
        .map(|&s| {
            let jump = arc_field(s0, s)?;
            let ref_delta = s / ref_steps as f64;
            let mut reference = s0.clone();
            for _ in 0..ref_steps {
                reference = euler_step(&reference, ref_delta)?;
            }
            Ok((s, product_metric(&reference, &jump, w)? / s))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub deltas: Vec<f64>,
    pub drifts: Vec<f64>,
    /// Least-squares slope of `log drift` against `log δ`; `+inf` when some
    /// drift is at rounding level (see [`DRIFT_FLOOR`]).
    pub order: f64,
}

/// Empirical order of the energy drift over a ladder of step sizes, each run
/// to the same horizon with energy recorded at every step.
pub fn convergence_order<Sys: FirstOrderSystem>(
    system: &Sys,
    s0: &Sys::State,
    deltas: &[f64],
    t_max: f64,
) -> Result<ConvergenceReport> {
    if deltas.len() < 2 {
        return Err(Error::InvalidConfig("convergence order needs at least two step sizes".into()));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidConfig("step sizes must be strictly decreasing".into()));
    }
    let drifts = deltas
        .iter()
        .map(|&delta| {
            let cfg = IntegratorConfig { delta, t_max, snapshot_times: vec![], record_energy_every: 1 };
            energy_drift(&integrate_system(system, s0, &cfg, |_, _| Ok(()))?)
        })
        .collect::<Result<Vec<_>>>()?;
    let floor = DRIFT_FLOOR * system.energy(s0)?.abs().max(1.0);
    let order = if drifts.iter().any(|d| *d <= floor) {
        f64::INFINITY
    } else {
        let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
        let ys: Vec<f64> = drifts.iter().map(|d| d.ln()).collect();
        ls_slope(&xs, &ys)
    };
    Ok(ConvergenceReport { deltas: deltas.to_vec(), drifts, order })
}
