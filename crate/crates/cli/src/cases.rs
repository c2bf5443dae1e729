//! The experiment presets behind `archam <case>`.

use std::sync::Arc;

use archam_core::arc_flow::{
    energy_drift, integrate_flow_observed, integrate_system, FirstOrderSystem, IntegratorConfig, Trajectory,
};
use archam_core::free_energy::{minimum_free_energy, symplectic_variation, symplectic_variation_extended};
use archam_core::grid_measure::{build_uniform_grid, Grid, Measure, Potential, State, WeightFn, PROBABILITY_TOL};
use archam_core::pendulum::{Pendulum, PendulumState};
use archam_core::presets;
use archam_core::Error;
use serde::Serialize;

use crate::config::{Case, RunConfig};
use crate::emit::{num_rows, Cell, Check, Emitter, LinePlot, RunArtifacts, Series};
use crate::error::{CliError, CliResult};
use crate::verify::run_verify_suite;

pub fn run_case(cfg: &RunConfig) -> CliResult<RunArtifacts> {
    cfg.validate()?;
    match cfg.case {
        Case::FlowNormal | Case::FlowCauchy | Case::FlowCustom => run_flow(cfg),
        Case::Simplex3 => run_simplex3(cfg),
        Case::Scalar1 => run_scalar1(cfg),
        Case::Pendulum => run_pendulum(cfg),
        Case::Verify => run_verify_suite(cfg),
    }
}

fn integrator(cfg: &RunConfig) -> CliResult<IntegratorConfig> {
    Ok(IntegratorConfig::new(cfg.delta, cfg.t_max, cfg.snapshots.clone())?)
}

pub fn initial_flow_state(cfg: &RunConfig) -> CliResult<State> {
    let grid = build_uniform_grid(cfg.grid.min, cfg.grid.max, cfg.grid.n)?;
    let state = match cfg.case {
        Case::FlowNormal => presets::normal_location(grid)?,
        Case::FlowCauchy => presets::cauchy_location(grid)?,
        Case::FlowCustom => {
            let (f, d) = match (&cfg.custom_potential, &cfg.custom_density) {
                (Some(f), Some(d)) => (f, d),
                _ => return Err(CliError::Usage("flow-custom requires custom_potential and custom_density".into())),
            };
            let weights: Vec<f64> = d.iter().map(|x| x * grid.cell_width()).collect();
            State::new(Potential::new(grid.clone(), f.clone())?, Measure::from_weights(grid, &weights)?)?
        }
        other => return Err(CliError::Usage(format!("{} is not a flow case", other.name()))),
    };
    Ok(state)
}

/// Tracks the per-step domain invariants along a flow.
#[derive(Debug, Default, Clone, Copy, Serialize)]
pub struct DomainWatch {
    pub steps: usize,
    pub max_mass_deviation: f64,
    pub min_weight: f64,
    pub min_potential_increment: f64,
}

impl DomainWatch {
    pub fn new() -> Self {
        DomainWatch { steps: 0, max_mass_deviation: 0.0, min_weight: f64::INFINITY, min_potential_increment: f64::INFINITY }
    }

    pub fn observe(&mut self, prev_f: &mut Option<Vec<f64>>, s: &State) {
        self.steps += 1;
        self.max_mass_deviation = self.max_mass_deviation.max((s.p().total_mass() - 1.0).abs());
        self.min_weight = s.p().weights().into_iter().fold(self.min_weight, f64::min);
        if let Some(prev) = prev_f.as_ref() {
            let inc = s.f().values().iter().zip(prev).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min);
            self.min_potential_increment = self.min_potential_increment.min(inc);
        }
        *prev_f = Some(s.f().values().to_vec());
    }

    pub fn checks(&self, prefix: &str) -> Vec<Check> {
        vec![
            Check::at_most(&format!("{prefix}.mass_preserved"), self.max_mass_deviation, PROBABILITY_TOL, format!("{} states", self.steps)),
            Check::flag(&format!("{prefix}.weights_nonnegative"), self.min_weight >= 0.0, self.min_weight, 0.0, "min weight over all states"),
            Check::flag(
                &format!("{prefix}.potential_nondecreasing"),
                self.min_potential_increment >= 0.0,
                self.min_potential_increment,
                0.0,
                "min pointwise f increment per step",
            ),
        ]
    }
}

/// Integrates a flow while recording the domain invariants at every step.
pub fn watched_flow(s0: &State, icfg: &IntegratorConfig, cfg: &RunConfig) -> CliResult<(Trajectory<State>, DomainWatch)> {
    let w = WeightFn::new(cfg.weight_p)?;
    let mut watch = DomainWatch::new();
    let mut prev = None;
    let traj = integrate_flow_observed(s0, icfg, &w, cfg.domain_mode, |_, s| {
        watch.observe(&mut prev, s);
        Ok(())
    })?;
    Ok((traj, watch))
}

#[derive(Serialize)]
struct FlowSummary {
    case: &'static str,
    h0: f64,
    energy_drift: f64,
    domain_violations: usize,
    snapshots: Vec<SnapshotSummary>,
    watch: DomainWatch,
}

#[derive(Serialize)]
struct SnapshotSummary {
    step: usize,
    t: f64,
    energy: f64,
    posterior_mean: f64,
    total_mass: f64,
}

fn snapshot_name(t: f64) -> String {
    format!("snapshot_t{t:.3}.csv")
}

fn emit_flow(em: &mut Emitter, cfg: &RunConfig, s0: &State) -> CliResult<Vec<Check>> {
    let w = WeightFn::new(cfg.weight_p)?;
    let report = s0.domain_check(&w, cfg.domain_mode)?;
    let (traj, watch) = watched_flow(s0, &integrator(cfg)?, cfg)?;
    let drift = energy_drift(&traj)?;

    em.csv("energy.csv", &["t", "H"], num_rows(traj.energy_series.iter().map(|&(t, h)| vec![t, h])))?;
    for snap in &traj.snapshots {
        let pts = snap.state.grid().points().to_vec();
        let rows = pts.iter().zip(snap.state.f().values()).zip(snap.state.p().densities()).map(|((t, f), p)| vec![*t, *f, p]);
        em.csv(&snapshot_name(snap.t), &["theta", "f", "p"], num_rows(rows))?;
    }

    let mut snaps = Vec::new();
    for snap in &traj.snapshots {
        snaps.push(SnapshotSummary {
            step: snap.step,
            t: snap.t,
            energy: minimum_free_energy(snap.state.f(), snap.state.p(), false)?,
            posterior_mean: snap.state.p().mean(),
            total_mass: snap.state.p().total_mass(),
        });
    }
    let h0 = traj.energy_series[0].1;
    em.json(
        "summary.json",
        &FlowSummary { case: cfg.case.name(), h0, energy_drift: drift, domain_violations: report.violations.len(), snapshots: snaps, watch },
    )?;

    let label = |t: f64| format!("t = {t:.3}");
    em.svg("energy.svg", &LinePlot {
        title: format!("{}: minimum free energy", cfg.case.name()),
        x_label: "t".into(),
        y_label: "H".into(),
        series: vec![Series { label: "H(f_t, P_t)".into(), points: traj.energy_series.clone() }],
    })?;
    let panel = |title: &str, y: &str, pick: &dyn Fn(&State) -> Vec<f64>| LinePlot {
        title: format!("{}: {title}", cfg.case.name()),
        x_label: "theta".into(),
        y_label: y.into(),
        series: traj
            .snapshots
            .iter()
            .map(|s| Series { label: label(s.t), points: s.state.grid().points().iter().copied().zip(pick(&s.state)).collect() })
            .collect(),
    };
    em.svg("potential.svg", &panel("negative log-likelihood", "f", &|s| s.f().values().to_vec()))?;
    em.svg("density.svg", &panel("density", "p", &|s| s.p().densities()))?;

    let mut checks = vec![Check::info("energy_drift", drift, format!("max |H_t - H_0|, H_0 = {h0:.6}"))];
    checks.push(Check::info("domain_violations", report.violations.len() as f64, format!("f < log w points, mode {:?}", cfg.domain_mode)));
    checks.extend(watch.checks("flow"));
    Ok(checks)
}

fn run_flow(cfg: &RunConfig) -> CliResult<RunArtifacts> {
    let s0 = initial_flow_state(cfg)?;
    let mut em = Emitter::new(&cfg.out_dir, &cfg.formats)?;
    let checks = emit_flow(&mut em, cfg, &s0)?;
    em.finish(cfg, checks)
}

fn simplex_lattice(divisions: usize) -> Vec<[f64; 3]> {
    let d = divisions as f64;
    let mut out = Vec::new();
    for i in 0..=divisions {
        for j in 0..=divisions - i {
            let k = divisions - i - j;
            out.push([i as f64 / d, j as f64 / d, k as f64 / d]);
        }
    }
    out
}

fn run_simplex3(cfg: &RunConfig) -> CliResult<RunArtifacts> {
    let s0 = presets::simplex3()?;
    let grid = s0.grid().clone();
    let mut em = Emitter::new(&cfg.out_dir, &cfg.formats)?;

    let mut field_p = Vec::new();
    for p in simplex_lattice(cfg.simplex_divisions) {
        let state = State::new(s0.f().clone(), Measure::from_weights(grid.clone(), &p)?)?;
        let v = symplectic_variation(&state)?;
        field_p.push(vec![p[0], p[1], p[2], v.p_dir[0], v.p_dir[1], v.p_dir[2]]);
    }
    em.csv("field_p.csv", &["P1", "P2", "P3", "dP1", "dP2", "dP3"], num_rows(field_p))?;

    let mut field_f = Vec::new();
    for f in simplex_lattice(cfg.simplex_divisions) {
        let state = State::new(Potential::new(grid.clone(), f.to_vec())?, s0.p().clone())?;
        let d = symplectic_variation(&state)?.f_dir;
        field_f.push(vec![f[0], f[1], f[2], d.values()[0], d.values()[1], d.values()[2]]);
    }
    em.csv("field_f.csv", &["f1", "f2", "f3", "df1", "df2", "df3"], num_rows(field_f))?;

    let checks = emit_flow(&mut em, cfg, &s0)?;
    em.finish(cfg, checks)
}

/// The single-atom system with `H` extended to positive, unnormalised `P`.
struct ExtendedScalar {
    grid: Arc<Grid>,
}

impl ExtendedScalar {
    fn state(&self, f: f64, p: f64) -> archam_core::Result<(Potential, Measure)> {
        Ok((Potential::new(self.grid.clone(), vec![f])?, Measure::from_weights(self.grid.clone(), &[p])?))
    }
}

impl FirstOrderSystem for ExtendedScalar {
    type State = (f64, f64);

    fn step(&self, &(f, p): &(f64, f64), delta: f64) -> archam_core::Result<(f64, f64)> {
        let (fp, pm) = self.state(f, p)?;
        let v = symplectic_variation_extended(&fp, &pm)?;
        let next = (f + delta * v.f_dir.values()[0], p + delta * v.p_dir[0]);
        if !(next.0.is_finite() && next.1 > 0.0) {
            return Err(Error::NonFinite { index: 0, value: next.1 });
        }
        Ok(next)
    }

    fn energy(&self, &(f, p): &(f64, f64)) -> archam_core::Result<f64> {
        let (fp, pm) = self.state(f, p)?;
        minimum_free_energy(&fp, &pm, true)
    }
}

fn run_scalar1(cfg: &RunConfig) -> CliResult<RunArtifacts> {
    let sys = ExtendedScalar { grid: Grid::finite_labels(vec![1.0])? };
    let mut em = Emitter::new(&cfg.out_dir, &cfg.formats)?;
    let n = cfg.scalar1_resolution;
    let lattice = |i: usize, max: f64, n: usize| (i as f64) * max / n as f64;

    let mut contour = Vec::with_capacity(n * n);
    for i in 1..=n {
        for j in 1..=n {
            let (f, p) = (lattice(i, cfg.scalar1_f_max, n), lattice(j, cfg.scalar1_p_max, n));
            contour.push(vec![f, p, sys.energy(&(f, p))?]);
        }
    }
    em.csv("contour.csv", &["f", "P", "H"], num_rows(contour))?;

    let coarse = n.min(20);
    let mut field = Vec::new();
    for i in 1..=coarse {
        for j in 1..=coarse {
            let (f, p) = (lattice(i, cfg.scalar1_f_max, coarse), lattice(j, cfg.scalar1_p_max, coarse));
            let (fp, pm) = sys.state(f, p)?;
            let v = symplectic_variation_extended(&fp, &pm)?;
            field.push(vec![f, p, v.f_dir.values()[0], v.p_dir[0]]);
        }
    }
    em.csv("field.csv", &["f", "P", "df", "dP"], num_rows(field))?;

    let icfg = IntegratorConfig { record_energy_every: 10, ..integrator(cfg)? };
    let mut rows = Vec::new();
    let mut series = Vec::new();
    let mut max_drift: f64 = 0.0;
    let starts: Vec<(f64, f64)> =
        [0.5, 1.0, 2.0].iter().flat_map(|&f| [0.5, 1.0, 2.0, 4.0].into_iter().map(move |p| (f, p))).collect();
    for (id, s0) in starts.iter().enumerate() {
        let mut path = Vec::new();
        let traj = integrate_system(&sys, s0, &icfg, |k, s| {
            if k % icfg.record_energy_every == 0 {
                path.push(*s);
            }
            Ok(())
        })?;
        max_drift = max_drift.max(energy_drift(&traj)?);
        for (&(t, h), &(f, p)) in traj.energy_series.iter().zip(&path) {
            rows.push(vec![Cell::Int(id), Cell::Num(t), Cell::Num(f), Cell::Num(p), Cell::Num(h)]);
        }
        series.push(Series { label: String::new(), points: path.iter().map(|&(f, p)| (f, p)).collect() });
    }
    em.csv("flows.csv", &["id", "t", "f", "P", "H"], rows)?;
    em.svg("flows.svg", &LinePlot {
        title: "scalar1: flows of the extended minimum free energy".into(),
        x_label: "f".into(),
        y_label: "P".into(),
        series,
    })?;
    em.json("summary.json", &serde_json::json!({ "case": "scalar1", "max_energy_drift": max_drift, "n_flows": starts.len() }))?;
    em.finish(cfg, vec![Check::info("energy_drift", max_drift, "max over scalar1 flows")])
}

fn run_pendulum(cfg: &RunConfig) -> CliResult<RunArtifacts> {
    let s0 = PendulumState::new(cfg.pendulum_initial[0], cfg.pendulum_initial[1]);
    let mut em = Emitter::new(&cfg.out_dir, &cfg.formats)?;
    let icfg = integrator(cfg)?;
    let mut path = Vec::new();
    let traj = integrate_system(&Pendulum, &s0, &icfg, |k, s| {
        path.push((k, *s));
        Ok(())
    })?;
    let drift = energy_drift(&traj)?;
    em.csv("energy.csv", &["t", "H"], num_rows(traj.energy_series.iter().map(|&(t, h)| vec![t, h])))?;
    em.csv(
        "trajectory.csv",
        &["t", "x", "z"],
        num_rows(path.iter().map(|(k, s)| vec![*k as f64 * cfg.delta, s.angle, s.momentum])),
    )?;

    // phase portrait over [-π, π] × [-25, 25]
    use std::f64::consts::PI;
    let portrait_cfg = IntegratorConfig { record_energy_every: 1, ..IntegratorConfig::new(cfg.delta, cfg.t_max.min(1.0), vec![])? };
    let mut rows = Vec::new();
    let mut series = Vec::new();
    let mut id = 0;
    for i in 0..9 {
        for j in 0..5 {
            let start = PendulumState::new(-PI + i as f64 * PI / 4.0, -25.0 + j as f64 * 12.5);
            let mut pts = Vec::new();
            integrate_system(&Pendulum, &start, &portrait_cfg, |k, s| {
                if k % 10 == 0 {
                    pts.push((k as f64 * cfg.delta, *s));
                }
                Ok(())
            })?;
            let mut segment = Vec::new();
            let mut last_x: Option<f64> = None;
            for (t, s) in &pts {
                let x = s.wrapped_angle();
                rows.push(vec![Cell::Int(id), Cell::Num(*t), Cell::Num(x), Cell::Num(s.momentum)]);
                if last_x.is_some_and(|lx| (x - lx).abs() > PI) {
                    series.push(Series { label: String::new(), points: std::mem::take(&mut segment) });
                }
                segment.push((x, s.momentum));
                last_x = Some(x);
            }
            series.push(Series { label: String::new(), points: segment });
            id += 1;
        }
    }
    em.csv("phase.csv", &["id", "t", "x", "z"], rows)?;
    em.svg("phase.svg", &LinePlot { title: "pendulum: phase portrait".into(), x_label: "x".into(), y_label: "z".into(), series })?;
    em.svg("energy.svg", &LinePlot {
        title: "pendulum: energy".into(),
        x_label: "t".into(),
        y_label: "H".into(),
        series: vec![Series { label: "H(x_t, z_t)".into(), points: traj.energy_series.clone() }],
    })?;
    em.json("summary.json", &serde_json::json!({
        "case": "pendulum",
        "initial": { "angle": s0.angle, "momentum": s0.momentum, "gravity": s0.gravity },
        "h0": traj.energy_series[0].1,
        "energy_drift": drift,
    }))?;
    em.finish(cfg, vec![Check::info("energy_drift", drift, "max |H_t - H_0|")])
}
