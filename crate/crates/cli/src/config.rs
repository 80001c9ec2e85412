//! Run configuration: the JSON schema, command-line overrides and validation.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use leolab::codes::{code_by_label, CodeSubspace};
use leolab::leo::LeoRoute;
use leolab::models::ModelConfig;
use leolab::opalg::{derive_seed, random_hermitian, CVector, Operator, C64};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Decompose,
    Synth,
    Verify,
    Simulate,
    Sweep,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Decompose => "decompose",
            Command::Synth => "synth",
            Command::Verify => "verify",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PlotStyle {
    Timeseries,
    Convergence,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_cycles: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_time: Option<f64>,
}

/// Initial system state; must lie in the code.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// Computational basis label such as `"01"`.
    Bits(String),
    /// Ambient basis index.
    BasisIndex(usize),
    /// Coordinates in the code basis (normalized on load).
    CodeCoords { re: Vec<f64>, im: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotConfig {
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub style: Option<PlotStyle>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath_seed: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub route: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leo: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<PathBuf>,
    #[serde(default)]
    pub pauli_table: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialState>,
    /// Run without pulses on the same time grid.
    #[serde(default)]
    pub free_evolution: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_overrides: Option<SeedOverrides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot: Option<PlotConfig>,
}

/// Parses a config, reporting JSON errors with line and column.
pub fn parse_config(text: &str, origin: &str) -> Result<RunConfig, CliError> {
    serde_json::from_str(text).map_err(|e| {
        CliError::Validation(format!("{origin}:{}:{}: {e}", e.line(), e.column()))
    })
}

/// Reads a config file; relative paths inside it resolve against its directory.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg = parse_config(&text, &path.display().to_string())?;
    let base = path.parent().unwrap_or(Path::new(""));
    let rebase = |p: &mut PathBuf| {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    };
    cfg.leo.as_mut().map(rebase);
    cfg.operator.as_mut().map(rebase);
    cfg.out.as_mut().map(rebase);
    if let Some(plot) = cfg.plot.as_mut() {
        rebase(&mut plot.path);
    }
    Ok(cfg)
}

/// Random hermitian probe spec `random:N:seed=S`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProbeSpec {
    pub count: usize,
    pub seed: u64,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        Self { count: 100, seed: 0 }
    }
}

impl FromStr for ProbeSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || {
            CliError::Validation(format!(
                "bad probe spec `{s}` (expected random:<count>:seed=<seed>)"
            ))
        };
        let mut parts = s.split(':');
        if parts.next() != Some("random") {
            return Err(bad());
        }
        let count: usize = parts.next().and_then(|c| c.parse().ok()).ok_or_else(bad)?;
        let seed: u64 = match parts.next() {
            Some(p) => p
                .strip_prefix("seed=")
                .and_then(|v| v.parse().ok())
                .ok_or_else(bad)?,
            None => 0,
        };
        if parts.next().is_some() || count == 0 {
            return Err(bad());
        }
        Ok(Self { count, seed })
    }
}

impl ProbeSpec {
    pub fn probes(&self, dim: usize) -> Vec<Operator> {
        (0..self.count as u64)
            .map(|k| random_hermitian(dim, derive_seed(self.seed, k)))
            .collect()
    }
}

pub fn parse_route(label: &str) -> Result<LeoRoute, CliError> {
    LeoRoute::from_str(label).map_err(|_| {
        CliError::Validation(format!(
            "unknown route `{label}` (valid routes: {})",
            LeoRoute::valid_labels()
        ))
    })
}

pub fn parse_code(label: &str) -> Result<CodeSubspace, CliError> {
    code_by_label(label).map_err(CliError::from)
}

/// Comma-separated cycle counts, e.g. `1,2,4,8`.
pub fn parse_n_list(s: &str) -> Result<Vec<u64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| CliError::Validation(format!("bad cycle count `{t}` in --n")))
        })
        .collect()
}

fn positive(name: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(CliError::Validation(format!("{name} must be positive, got {x}")))
    }
}

/// Time grid for a single simulation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulateGrid {
    pub n_cycles: u64,
    pub tau: f64,
}

/// Time grid for a cycle sweep at fixed total free time.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepGrid {
    pub n_list: Vec<u64>,
    pub total_time: f64,
}

impl RunConfig {
    pub fn schedule(&self) -> Result<&ScheduleConfig, CliError> {
        self.schedule
            .as_ref()
            .ok_or_else(|| CliError::Validation(format!("`schedule` is required for {}", self.command_str())))
    }

    fn command_str(&self) -> &'static str {
        self.command.map(Command::as_str).unwrap_or("this command")
    }

    pub fn simulate_grid(&self) -> Result<SimulateGrid, CliError> {
        let s = self.schedule()?;
        if s.n_list.is_some() {
            return Err(CliError::Validation("simulate takes `n_cycles`, not `n_list`".into()));
        }
        let n_cycles = s
            .n_cycles
            .ok_or_else(|| CliError::Validation("schedule needs `n_cycles`".into()))?;
        let tau = match (s.tau, s.total_time) {
            (Some(t), None) => positive("tau", t)?,
            (None, Some(total)) => {
                let total = positive("total_time", total)?;
                if n_cycles == 0 {
                    return Err(CliError::Validation("total_time needs n_cycles >= 1".into()));
                }
                total / (2.0 * n_cycles as f64)
            }
            _ => {
                return Err(CliError::Validation(
                    "schedule needs exactly one of `tau` and `total_time`".into(),
                ))
            }
        };
        Ok(SimulateGrid { n_cycles, tau })
    }

    pub fn sweep_grid(&self) -> Result<SweepGrid, CliError> {
        let s = self.schedule()?;
        if s.tau.is_some() || s.n_cycles.is_some() {
            return Err(CliError::Validation(
                "sweep takes `n_list` and `total_time` only".into(),
            ));
        }
        let n_list = s
            .n_list
            .clone()
            .ok_or_else(|| CliError::Validation("sweep needs `n_list` (or --n)".into()))?;
        if n_list.is_empty() {
            return Err(CliError::Validation("`n_list` is empty".into()));
        }
        if n_list[0] == 0 || n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Validation(
                "`n_list` must be positive and strictly ascending".into(),
            ));
        }
        let total_time = positive(
            "total_time",
            s.total_time
                .ok_or_else(|| CliError::Validation("sweep needs `total_time`".into()))?,
        )?;
        Ok(SweepGrid { n_list, total_time })
    }

    pub fn probe_spec(&self) -> Result<ProbeSpec, CliError> {
        self.probes.as_deref().map(str::parse).unwrap_or(Ok(ProbeSpec::default()))
    }

    /// Model config with seed overrides applied.
    pub fn model_config(&self) -> Result<ModelConfig, CliError> {
        let mut m = self
            .model
            .clone()
            .ok_or_else(|| CliError::Validation(format!("`model` is required for {}", self.command_str())))?;
        if let Some(o) = &self.seed_overrides {
            if let Some(s) = o.seed {
                m.seed = s;
            }
            if let Some(s) = o.bath_seed {
                m.bath_seed = Some(s);
            }
        }
        Ok(m)
    }

    pub fn out(&self) -> Result<&Path, CliError> {
        self.out
            .as_deref()
            .ok_or_else(|| CliError::Validation("an output path is required (--out or `out`)".into()))
    }
}

impl InitialState {
    pub fn resolve(&self, code: &CodeSubspace) -> Result<CVector, CliError> {
        let dim = code.ambient_dim();
        let v = match self {
            InitialState::Bits(bits) => {
                if bits.is_empty() || !bits.chars().all(|c| c == '0' || c == '1') {
                    return Err(CliError::Validation(format!("initial state `{bits}` is not a bit string")));
                }
                if 1usize.checked_shl(bits.len() as u32) != Some(dim) {
                    return Err(CliError::Validation(format!(
                        "initial state `{bits}` does not fit dimension {dim}"
                    )));
                }
                leolab::codes::qubit_state(bits)
            }
            InitialState::BasisIndex(k) => {
                if *k >= dim {
                    return Err(CliError::Validation(format!(
                        "initial basis index {k} out of range for dimension {dim}"
                    )));
                }
                leolab::opalg::basis_vector(dim, *k)
            }
            InitialState::CodeCoords { re, im } => {
                if re.len() != code.code_dim() || im.len() != code.code_dim() {
                    return Err(CliError::Validation(format!(
                        "code_coords need {} entries",
                        code.code_dim()
                    )));
                }
                let coords = CVector::from_iterator(
                    re.len(),
                    re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)),
                );
                let norm = coords.norm();
                if !(norm.is_finite() && norm > 0.0) {
                    return Err(CliError::Validation("code_coords must be a nonzero finite vector".into()));
                }
                code.encode(&(coords / C64::new(norm, 0.0)))?
            }
        };
        Ok(v)
    }
}
