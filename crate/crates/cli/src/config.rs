//! Run configuration. Precedence, lowest to highest: built-in case defaults,
//! the `--config` JSON file, command-line flags.

use std::path::{Path, PathBuf};

use archam_core::grid_measure::DomainMode;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Case {
    Pendulum,
    Scalar1,
    Simplex3,
    FlowNormal,
    FlowCauchy,
    FlowCustom,
    Verify,
}

impl Case {
    pub fn name(&self) -> &'static str {
        match self {
            Case::Pendulum => "pendulum",
            Case::Scalar1 => "scalar1",
            Case::Simplex3 => "simplex3",
            Case::FlowNormal => "flow-normal",
            Case::FlowCauchy => "flow-cauchy",
            Case::FlowCustom => "flow-custom",
            Case::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

pub fn parse_formats(s: &str) -> CliResult<Vec<Format>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let f = match part {
            "csv" => Format::Csv,
            "json" => Format::Json,
            "svg" => Format::Svg,
            other => return Err(CliError::Usage(format!("unknown format `{other}`"))),
        };
        if !out.contains(&f) {
            out.push(f);
        }
    }
    out.sort();
    Ok(out)
}

pub fn parse_list(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().map_err(|_| CliError::Usage(format!("bad number `{p}` in list"))))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

/// Effective configuration of one run, echoed verbatim into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub case: Case,
    pub grid: GridConfig,
    pub weight_p: f64,
    pub delta: f64,
    pub t_max: f64,
    pub snapshots: Vec<f64>,
    pub domain_mode: DomainMode,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub formats: Vec<Format>,
    pub parallel: bool,
    pub pendulum_initial: [f64; 2],
    pub scalar1_f_max: f64,
    pub scalar1_p_max: f64,
    pub scalar1_resolution: usize,
    pub simplex_divisions: usize,
    /// Potential values on the grid for `flow-custom`.
    pub custom_potential: Option<Vec<f64>>,
    /// Density values on the grid for `flow-custom`.
    pub custom_density: Option<Vec<f64>>,
    /// Replaces every tolerance of the verify suite when set.
    pub tolerance_override: Option<f64>,
}

const DEFAULT_SNAPSHOTS: [f64; 4] = [0.0, 1.0, 2.0, 3.0];

impl RunConfig {
    pub fn defaults(case: Case) -> Self {
        let t_max = match case {
            Case::Scalar1 => 1.0,
            _ => 3.0,
        };
        RunConfig {
            case,
            grid: GridConfig { min: -10.0, max: 10.0, n: 2000 },
            weight_p: 2.0,
            delta: 0.001,
            t_max,
            snapshots: DEFAULT_SNAPSHOTS.iter().copied().filter(|t| *t <= t_max).collect(),
            domain_mode: DomainMode::Warn,
            seed: 0,
            out_dir: PathBuf::from("archam-out").join(case.name()),
            formats: vec![Format::Csv, Format::Json],
            parallel: false,
            pendulum_initial: [1.0, 0.0],
            scalar1_f_max: 5.0,
            scalar1_p_max: 5.0,
            scalar1_resolution: 200,
            simplex_divisions: 10,
            custom_potential: None,
            custom_density: None,
            tolerance_override: None,
        }
    }

    // negated comparisons so that NaN is rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Usage(m));
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return bad(format!("--delta {} must lie in (0, 1]", self.delta));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return bad(format!("--t-max {} must be finite and >= 0", self.t_max));
        }
        if let Some(t) = self.snapshots.iter().find(|t| !(**t >= 0.0 && **t <= self.t_max)) {
            return bad(format!("snapshot {t} outside [0, {}]", self.t_max));
        }
        if self.snapshots.windows(2).any(|w| w[0] >= w[1]) {
            return bad("snapshots must be strictly increasing".into());
        }
        if !(self.weight_p >= 0.0 && self.weight_p.is_finite()) {
            return bad(format!("--weight-p {} must be >= 0", self.weight_p));
        }
        if self.grid.n == 0 || !(self.grid.min < self.grid.max) {
            return bad("grid needs min < max and n >= 1".into());
        }
        if self.scalar1_resolution == 0 || !(self.scalar1_f_max > 0.0 && self.scalar1_p_max > 0.0) {
            return bad("scalar1 lattice needs positive bounds and resolution".into());
        }
        if self.simplex_divisions == 0 {
            return bad("simplex_divisions must be positive".into());
        }
        if let Some(t) = self.tolerance_override {
            if !(t >= 0.0) {
                return bad(format!("tolerance override {t} must be >= 0"));
            }
        }
        if self.case == Case::FlowCustom {
            for (name, v) in [("custom_potential", &self.custom_potential), ("custom_density", &self.custom_density)] {
                match v {
                    None => return bad(format!("flow-custom requires `{name}` in the config file")),
                    Some(v) if v.len() != self.grid.n => {
                        return bad(format!("`{name}` has {} values, grid has {}", v.len(), self.grid.n))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

/// Flat JSON config document; every key optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub grid_min: Option<f64>,
    pub grid_max: Option<f64>,
    pub grid_n: Option<usize>,
    pub weight_p: Option<f64>,
    pub delta: Option<f64>,
    pub t_max: Option<f64>,
    pub snapshots: Option<Vec<f64>>,
    pub domain_mode: Option<DomainMode>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub parallel: Option<bool>,
    pub pendulum_angle: Option<f64>,
    pub pendulum_momentum: Option<f64>,
    pub scalar1_f_max: Option<f64>,
    pub scalar1_p_max: Option<f64>,
    pub scalar1_resolution: Option<usize>,
    pub simplex_divisions: Option<usize>,
    pub custom_potential: Option<Vec<f64>>,
    pub custom_density: Option<Vec<f64>>,
    pub tolerance_override: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }
}

/// Command-line overrides; `None` leaves the lower layers untouched.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub grid_min: Option<f64>,
    pub grid_max: Option<f64>,
    pub grid_n: Option<usize>,
    pub weight_p: Option<f64>,
    pub delta: Option<f64>,
    pub t_max: Option<f64>,
    pub snapshots: Option<Vec<f64>>,
    pub domain_mode: Option<DomainMode>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
    pub parallel: bool,
    pub tolerance_override: Option<f64>,
}

pub fn resolve(case: Case, file: Option<ConfigFile>, cli: Overrides) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::defaults(case);
    let mut snapshots_given = false;
    if let Some(f) = file {
        macro_rules! set {
            ($($src:ident => $dst:expr),* $(,)?) => {
                $(if let Some(v) = f.$src { $dst = v; })*
            };
        }
        set!(grid_min => cfg.grid.min, grid_max => cfg.grid.max, grid_n => cfg.grid.n,
             weight_p => cfg.weight_p, delta => cfg.delta, t_max => cfg.t_max,
             domain_mode => cfg.domain_mode, seed => cfg.seed, out => cfg.out_dir,
             parallel => cfg.parallel, pendulum_angle => cfg.pendulum_initial[0],
             pendulum_momentum => cfg.pendulum_initial[1], scalar1_f_max => cfg.scalar1_f_max,
             scalar1_p_max => cfg.scalar1_p_max, scalar1_resolution => cfg.scalar1_resolution,
             simplex_divisions => cfg.simplex_divisions);
        if let Some(s) = f.snapshots {
            cfg.snapshots = s;
            snapshots_given = true;
        }
        if let Some(fmt) = f.format {
            cfg.formats = parse_formats(&fmt)?;
        }
        cfg.custom_potential = f.custom_potential;
        cfg.custom_density = f.custom_density;
        cfg.tolerance_override = f.tolerance_override;
    }
    macro_rules! over {
        ($($src:ident => $dst:expr),* $(,)?) => {
            $(if let Some(v) = cli.$src { $dst = v; })*
        };
    }
    over!(grid_min => cfg.grid.min, grid_max => cfg.grid.max, grid_n => cfg.grid.n,
          weight_p => cfg.weight_p, delta => cfg.delta, t_max => cfg.t_max,
          domain_mode => cfg.domain_mode, seed => cfg.seed, out => cfg.out_dir,
          formats => cfg.formats);
    if let Some(s) = cli.snapshots {
        cfg.snapshots = s;
        snapshots_given = true;
    }
    if cli.tolerance_override.is_some() {
        cfg.tolerance_override = cli.tolerance_override;
    }
    cfg.parallel |= cli.parallel;
    if !snapshots_given {
        cfg.snapshots = DEFAULT_SNAPSHOTS.iter().copied().filter(|t| *t <= cfg.t_max).collect();
    }
    cfg.validate()?;
    Ok(cfg)
}
