use std::path::Path;

use serde::Serialize;

use leolab::classify::{classify_pauli_strings, decompose as block_decompose, write_pauli_table_csv, OperatorClass};
use leolab::codes::CodeSubspace;
use leolab::dynamics::{self, write_report_csv, write_sweep_csv, ParityKickSchedule};
use leolab::leo::{synthesize, unitary_from_json, verify_leo, LeakageEliminationOperator, LeoJson};
use leolab::models::SystemBathModel;
use leolab::opalg::{op_norm, NormKind, Operator, OperatorJson};

use crate::config::{parse_code, parse_route, PlotStyle, RunConfig};
use crate::output::Artifact;
use crate::plot::{emit_plot_data, PlotSource};
use crate::CliError;

/// Files to write, the summary line, and an optional failure to report after
/// the files are written.
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub summary: String,
    pub failure: Option<CliError>,
}

fn ok(artifacts: Vec<Artifact>, summary: String) -> Result<Outcome, CliError> {
    Ok(Outcome { artifacts, summary, failure: None })
}

fn artifact(path: &Path, bytes: Vec<u8>) -> Artifact {
    Artifact { path: path.to_path_buf(), bytes }
}

fn pretty<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s.into_bytes()
}

fn read(path: &Path, what: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {what} {}: {e}", path.display())))
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "json")
}

/// The code named in the config, or the model's code; both must agree.
fn resolve_code(cfg: &RunConfig, model: Option<&SystemBathModel>) -> Result<CodeSubspace, CliError> {
    match (&cfg.code, model) {
        (Some(label), Some(m)) => {
            let code = parse_code(label)?;
            if code.ambient_dim() != m.system_dim || !code.same_span(&m.code, 1e-10) {
                return Err(CliError::Validation(format!(
                    "code `{label}` does not match model code `{}`",
                    m.code.label()
                )));
            }
            Ok(m.code.clone())
        }
        (Some(label), None) => parse_code(label),
        (None, Some(m)) => Ok(m.code.clone()),
        (None, None) => Err(CliError::Validation("a code label is required (--code or `code`)".into())),
    }
}

#[derive(Serialize)]
struct OperatorDecomposition {
    code_label: String,
    class: String,
    e_norm: f64,
    eperp_norm: f64,
    l_norm: f64,
    e_part: OperatorJson,
    eperp_part: OperatorJson,
    l_part: OperatorJson,
}

#[derive(Serialize)]
struct TermClass {
    index: usize,
    class: String,
    system_norm: f64,
}

#[derive(Serialize)]
struct ModelDecomposition {
    model_id: String,
    code_label: String,
    system_dim: usize,
    bath_dim: usize,
    g: f64,
    terms: Vec<TermClass>,
    h_c_norm: f64,
    h_perp_norm: f64,
    h_l_norm: f64,
    reconstruction_residual: f64,
}

pub fn decompose(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let out = cfg.out()?;
    let sources = [cfg.pauli_table, cfg.operator.is_some(), cfg.model.is_some()];
    if sources.iter().filter(|&&s| s).count() != 1 {
        return Err(CliError::Validation(
            "decompose needs exactly one of --pauli, --operator or `model`".into(),
        ));
    }
    let frob = |m: &Operator| op_norm(m, NormKind::Frobenius);

    if cfg.pauli_table {
        let code = resolve_code(cfg, None)?;
        let dim = code.ambient_dim();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(CliError::Validation(format!(
                "code `{}` does not live on qubits (dimension {dim})",
                code.label()
            )));
        }
        let rows = classify_pauli_strings(dim.trailing_zeros() as usize, &code)?;
        let mut buf = Vec::new();
        write_pauli_table_csv(&rows, &mut buf)?;
        let count = |c: OperatorClass| rows.iter().filter(|r| r.class == c).count();
        let summary = format!(
            "decompose code={} pauli_strings={} E={} Eperp={} L={} mixed={}",
            code.label(),
            rows.len(),
            count(OperatorClass::E),
            count(OperatorClass::EPerp),
            count(OperatorClass::L),
            count(OperatorClass::Mixed)
        );
        return ok(vec![artifact(out, buf)], summary);
    }

    if let Some(path) = &cfg.operator {
        let code = resolve_code(cfg, None)?;
        let m = Operator::from_json(&read(path, "operator")?)?.with_detected_tags();
        let dec = block_decompose(&m, &code)?;
        let (e, ep, l) = dec.norms();
        let class = dec.class();
        let body = OperatorDecomposition {
            code_label: code.label().to_string(),
            class: class.to_string(),
            e_norm: e,
            eperp_norm: ep,
            l_norm: l,
            e_part: (&dec.e_part).into(),
            eperp_part: (&dec.eperp_part).into(),
            l_part: (&dec.l_part).into(),
        };
        let summary = format!("decompose class={class} e_norm={e:.6e} eperp_norm={ep:.6e} l_norm={l:.6e}");
        return ok(vec![artifact(out, pretty(&body))], summary);
    }

    let model = cfg.model_config()?.build()?;
    let code = resolve_code(cfg, Some(&model))?;
    let body = ModelDecomposition {
        model_id: model.id.clone(),
        code_label: code.label().to_string(),
        system_dim: model.system_dim,
        bath_dim: model.bath_dim,
        g: model.g,
        terms: model
            .terms
            .iter()
            .enumerate()
            .map(|(index, t)| TermClass { index, class: t.class.to_string(), system_norm: frob(&t.system) })
            .collect(),
        h_c_norm: frob(&model.h_c),
        h_perp_norm: frob(&model.h_perp),
        h_l_norm: frob(&model.h_l),
        reconstruction_residual: model.reconstruction_residual(),
    };
    let summary = format!(
        "decompose model={} terms={} h_l_norm={:.6e} reconstruction_residual={:.3e}",
        body.model_id,
        body.terms.len(),
        body.h_l_norm,
        body.reconstruction_residual
    );
    ok(vec![artifact(out, pretty(&body))], summary)
}

pub fn synth(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let out = cfg.out()?;
    let route = parse_route(
        cfg.route
            .as_deref()
            .ok_or_else(|| CliError::Validation("synth needs a route (--route or `route`)".into()))?,
    )?;
    let model = match &cfg.model {
        Some(_) => Some(cfg.model_config()?.build()?),
        None => None,
    };
    let code = resolve_code(cfg, model.as_ref())?;
    let leo = synthesize(route, &code)?;
    let summary = format!(
        "synth route={route} code={} dim={} structural_residual={:.3e}",
        code.label(),
        leo.unitary().dim(),
        leo.structural_residual()
    );
    ok(vec![artifact(out, pretty(&LeoJson::from(&leo)))], summary)
}

pub fn verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let out = cfg.out()?;
    let path = cfg
        .leo
        .as_deref()
        .ok_or_else(|| CliError::Validation("verify needs an LEO file (--leo or `leo`)".into()))?;
    let text = read(path, "LEO file")?;
    let r = unitary_from_json(&text)?;
    let code = match &cfg.code {
        Some(label) => parse_code(label)?,
        None => {
            let j: LeoJson = serde_json::from_str(&text).map_err(|_| {
                CliError::Validation("LEO file carries no code label; pass --code".into())
            })?;
            parse_code(&j.code_label)?
        }
    };
    let spec = cfg.probe_spec()?;
    let report = verify_leo(&r, &code, &spec.probes(code.ambient_dim()))?;
    let max = report.max_residual();
    let verdict = if report.pass { "pass" } else { "FAIL" };
    let summary = format!(
        "verify {verdict} code={} probes={} max_residual={max:.3e} unitary_residual={:.3e}",
        code.label(),
        spec.count,
        report.unitary_residual
    );
    let failure = (!report.pass).then(|| CliError::Validation(summary.clone()));
    Ok(Outcome {
        artifacts: vec![artifact(out, pretty(&report))],
        summary,
        failure,
    })
}

fn pulses(cfg: &RunConfig, model: &SystemBathModel) -> Result<Option<LeakageEliminationOperator>, CliError> {
    if cfg.free_evolution {
        if cfg.route.is_some() || cfg.leo.is_some() {
            return Err(CliError::Validation("free evolution takes no route or LEO".into()));
        }
        return Ok(None);
    }
    match (&cfg.route, &cfg.leo) {
        (Some(_), Some(_)) => Err(CliError::Validation("give a route or an LEO file, not both".into())),
        (Some(label), None) => Ok(Some(synthesize(parse_route(label)?, &model.code)?)),
        (None, Some(path)) => LeakageEliminationOperator::from_json(&read(path, "LEO file")?, Some(&model.code))
            .map(Some)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display()))),
        (None, None) => Err(CliError::Validation(
            "pulses need a route or LEO file (or set free_evolution)".into(),
        )),
    }
}

fn initial_state(cfg: &RunConfig, code: &CodeSubspace) -> Result<leolab::opalg::CVector, CliError> {
    match &cfg.initial_state {
        Some(s) => s.resolve(code),
        None => Ok(code.basis().column(0).into_owned()),
    }
}

fn plot_artifact(cfg: &RunConfig, source: PlotSource<'_>, default: PlotStyle) -> Result<Option<Artifact>, CliError> {
    let Some(plot) = &cfg.plot else {
        return Ok(None);
    };
    let text = emit_plot_data(source, plot.style.unwrap_or(default))?;
    Ok(Some(artifact(&plot.path, text.into_bytes())))
}

fn route_label(p: &Option<LeakageEliminationOperator>) -> String {
    p.as_ref().map_or_else(|| "none".to_string(), |l| l.route().to_string())
}

pub fn simulate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let out = cfg.out()?;
    let grid = cfg.simulate_grid()?;
    let model = cfg.model_config()?.build()?;
    let code = resolve_code(cfg, Some(&model))?;
    let pulses = pulses(cfg, &model)?;
    let route = route_label(&pulses);
    let psi = initial_state(cfg, &code)?;
    let schedule = match pulses {
        Some(leo) => ParityKickSchedule::new(leo, grid.n_cycles, grid.tau)?,
        None => ParityKickSchedule::free(grid.n_cycles, grid.tau)?,
    };
    let report = dynamics::simulate(&model, &schedule, &psi)?;
    let bytes = if is_json(out) {
        pretty(&report)
    } else {
        let mut buf = Vec::new();
        write_report_csv(&report, &mut buf)?;
        buf
    };
    let mut artifacts = vec![artifact(out, bytes)];
    artifacts.extend(plot_artifact(cfg, PlotSource::Report(&report), PlotStyle::Timeseries)?);
    let summary = format!(
        "simulate model={} route={route} n_cycles={} final_leakage={:.6e} distance_to_limit={:.6e}",
        report.model_id,
        report.n_cycles,
        report.final_leakage(),
        report.distance_to_limit
    );
    ok(artifacts, summary)
}

pub fn sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let out = cfg.out()?;
    let grid = cfg.sweep_grid()?;
    let model = cfg.model_config()?.build()?;
    let code = resolve_code(cfg, Some(&model))?;
    let pulses = pulses(cfg, &model)?;
    let psi = initial_state(cfg, &code)?;
    let rows = dynamics::sweep_cycles(&model, pulses.as_ref(), grid.total_time, &grid.n_list, &psi)?;
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf)?;
    let mut artifacts = vec![artifact(out, buf)];
    artifacts.extend(plot_artifact(cfg, PlotSource::Sweep(&rows), PlotStyle::Convergence)?);
    let last = rows.last().expect("n_list is nonempty");
    let summary = format!(
        "sweep model={} route={} rows={} n_max={} final_leakage={:.6e} distance_to_limit={:.6e}",
        model.id,
        route_label(&pulses),
        rows.len(),
        last.n,
        last.final_leakage,
        last.distance_to_limit
    );
    ok(artifacts, summary)
}
