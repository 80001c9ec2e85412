//! Config-driven front end for `leolab`: builds codes, classifies operators,
//! synthesizes and verifies LEOs, and runs parity-kick simulations and sweeps.

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use leolab::LeoError;

pub mod commands;
pub mod config;
pub mod output;
pub mod plot;

pub use config::{Command, PlotStyle, RunConfig};

/// Exit status 1.
pub const EXIT_VALIDATION: i32 = 1;
/// Exit status 2.
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => f.write_str(m),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<LeoError> for CliError {
    fn from(e: LeoError) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(format!("i/o error: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "leolab", version, about = "Leakage-elimination operators and parity-kick decoupling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Split an operator, a model or all Pauli strings into E / Eperp / L parts.
    Decompose(RunArgs),
    /// Build an LEO for a code by a named route.
    Synth(RunArgs),
    /// Check an LEO file against a code with random hermitian probes.
    Verify(RunArgs),
    /// Run one pulsed (or free) evolution and write the time series.
    Simulate(RunArgs),
    /// Sweep the cycle count at fixed total time.
    Sweep(RunArgs),
}

impl CliCommand {
    pub fn split(self) -> (Command, RunArgs) {
        match self {
            CliCommand::Decompose(a) => (Command::Decompose, a),
            CliCommand::Synth(a) => (Command::Synth, a),
            CliCommand::Verify(a) => (Command::Verify, a),
            CliCommand::Simulate(a) => (Command::Simulate, a),
            CliCommand::Sweep(a) => (Command::Sweep, a),
        }
    }
}

/// Flags shared by every command; each overrides the matching config field.
#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (written atomically).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Code label: dfs2, dfs3, dfs4, dual_rail or bare:<n>.
    #[arg(long)]
    pub code: Option<String>,
    /// LEO route label.
    #[arg(long)]
    pub route: Option<String>,
    /// LEO JSON file.
    #[arg(long)]
    pub leo: Option<PathBuf>,
    /// Operator JSON file to decompose.
    #[arg(long)]
    pub operator: Option<PathBuf>,
    /// Classify every Pauli string on the code's qubits.
    #[arg(long)]
    pub pauli: bool,
    /// Probe spec `random:<count>:seed=<seed>`.
    #[arg(long)]
    pub probes: Option<String>,
    /// Comma-separated cycle counts for sweeps.
    #[arg(long)]
    pub n: Option<String>,
    /// Also write whitespace-delimited plot data here.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Plot style.
    #[arg(long, value_enum)]
    pub style: Option<PlotStyle>,
    /// Evolve without pulses.
    #[arg(long)]
    pub free: bool,
}

/// Loads the config (if any) and applies command-line overrides.
pub fn resolve_config(command: Command, args: RunArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(p) => config::load_config(p)?,
        None => RunConfig::default(),
    };
    match cfg.command {
        Some(c) if c != command => {
            return Err(CliError::Validation(format!(
                "config is for `{}` but `{}` was requested",
                c.as_str(),
                command.as_str()
            )))
        }
        _ => cfg.command = Some(command),
    }
    if args.out.is_some() {
        cfg.out = args.out;
    }
    if args.code.is_some() {
        cfg.code = args.code;
    }
    if args.route.is_some() {
        cfg.route = args.route;
    }
    if args.leo.is_some() {
        cfg.leo = args.leo;
    }
    if args.operator.is_some() {
        cfg.operator = args.operator;
    }
    if args.probes.is_some() {
        cfg.probes = args.probes;
    }
    cfg.pauli_table |= args.pauli;
    cfg.free_evolution |= args.free;
    if let Some(n) = &args.n {
        let sched = cfg.schedule.get_or_insert_with(Default::default);
        sched.n_list = Some(config::parse_n_list(n)?);
    }
    match (args.plot, cfg.plot.as_mut()) {
        (Some(path), Some(p)) => p.path = path,
        (Some(path), None) => cfg.plot = Some(config::PlotConfig { path, style: None }),
        _ => {}
    }
    if let Some(style) = args.style {
        match cfg.plot.as_mut() {
            Some(p) => p.style = Some(style),
            None => return Err(CliError::Validation("--style needs --plot".into())),
        }
    }
    Ok(cfg)
}

/// Runs a resolved config, writes its artifacts and returns the summary line.
pub fn run(cfg: &RunConfig) -> Result<String, CliError> {
    let command = cfg
        .command
        .ok_or_else(|| CliError::Validation("no command given".into()))?;
    let outcome = match command {
        Command::Decompose => commands::decompose(cfg)?,
        Command::Synth => commands::synth(cfg)?,
        Command::Verify => commands::verify(cfg)?,
        Command::Simulate => commands::simulate(cfg)?,
        Command::Sweep => commands::sweep(cfg)?,
    };
    for artifact in &outcome.artifacts {
        output::write_atomic(&artifact.path, &artifact.bytes)?;
    }
    match outcome.failure {
        Some(f) => Err(f),
        None => Ok(outcome.summary),
    }
}

/// Sizes the global rayon pool from `LEOLAB_THREADS` when set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("LEOLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Validation(format!("LEOLAB_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(format!("cannot size thread pool: {e}")))
}
