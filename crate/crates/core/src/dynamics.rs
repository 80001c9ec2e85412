//! Parity-kick (bang-bang) decoupling against exact reference dynamics.
//!
//! One cycle is `e^{-iH tau} (R^dag ⊗ I) e^{-iH tau} (R ⊗ I)` with ideal,
//! instantaneous pulses. Both free segments count toward elapsed time, so `n`
//! cycles cover `2 n tau` and the `n -> inf` limit at fixed total time `T` is
//! `exp(-i (H_C + H_perp) T)`.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::codes::CodeSubspace;
use crate::error::{LeoError, Result};
use crate::leo::LeakageEliminationOperator;
use crate::models::SystemBathModel;
use crate::opalg::{
    hermitian_eigen, hermitian_exponential, op_norm, tensor, CMatrix, CVector, NormKind, Operator,
    Tags, C64,
};

#[derive(Clone, Debug)]
pub struct ParityKickSchedule {
    n_cycles: u64,
    segment_time: f64,
    pulses: Option<LeakageEliminationOperator>,
}

impl ParityKickSchedule {
    pub fn new(pulses: LeakageEliminationOperator, n_cycles: u64, segment_time: f64) -> Result<Self> {
        Self::build(Some(pulses), n_cycles, segment_time)
    }

    /// `n_cycles` cycles splitting `total_free_time` evenly (`tau = T / 2n`).
    pub fn from_total_time(
        pulses: Option<LeakageEliminationOperator>,
        n_cycles: u64,
        total_free_time: f64,
    ) -> Result<Self> {
        if n_cycles == 0 {
            return Err(LeoError::InvalidArgument(
                "total-time schedules need at least one cycle".into(),
            ));
        }
        Self::build(pulses, n_cycles, total_free_time / (2.0 * n_cycles as f64))
    }

    /// Unpulsed reference on the same time grid.
    pub fn free(n_cycles: u64, segment_time: f64) -> Result<Self> {
        Self::build(None, n_cycles, segment_time)
    }

    fn build(pulses: Option<LeakageEliminationOperator>, n_cycles: u64, segment_time: f64) -> Result<Self> {
        if !(segment_time.is_finite() && segment_time > 0.0) {
            return Err(LeoError::InvalidArgument(format!(
                "segment time must be positive, got {segment_time}"
            )));
        }
        Ok(Self {
            n_cycles,
            segment_time,
            pulses,
        })
    }

    pub fn n_cycles(&self) -> u64 {
        self.n_cycles
    }

    pub fn segment_time(&self) -> f64 {
        self.segment_time
    }

    pub fn total_free_time(&self) -> f64 {
        2.0 * self.n_cycles as f64 * self.segment_time
    }

    pub fn pulses(&self) -> Option<&LeakageEliminationOperator> {
        self.pulses.as_ref()
    }

    pub fn is_pulsed(&self) -> bool {
        self.pulses.is_some()
    }
}

fn check_pulses(model: &SystemBathModel, leo: &LeakageEliminationOperator) -> Result<()> {
    if leo.code().ambient_dim() != model.system_dim {
        return Err(LeoError::DimensionMismatch {
            expected: model.system_dim,
            found: leo.code().ambient_dim(),
        });
    }
    if !leo.code().same_span(&model.code, 1e-10) {
        return Err(LeoError::CodeMismatch {
            pulses: leo.code().label().to_string(),
            model: model.code.label().to_string(),
        });
    }
    Ok(())
}

/// Propagator of a single cycle.
pub fn cycle_unitary(model: &SystemBathModel, schedule: &ParityKickSchedule) -> Result<Operator> {
    let free = hermitian_exponential(&model.h_joint, -schedule.segment_time)?;
    let cycle = match &schedule.pulses {
        Some(leo) => {
            check_pulses(model, leo)?;
            let id = Operator::identity(model.bath_dim);
            let r = tensor(leo.unitary(), &id);
            let r_dag = r.adjoint();
            &(&(&free * &r_dag) * &free) * &r
        }
        None => &free * &free,
    };
    cycle.certify_unitary()
}

/// `[e^{-iH tau} (R^dag ⊗ I) e^{-iH tau} (R ⊗ I)]^n`.
pub fn parity_kick_unitary(model: &SystemBathModel, schedule: &ParityKickSchedule) -> Result<Operator> {
    if schedule.n_cycles == 0 {
        if let Some(leo) = &schedule.pulses {
            check_pulses(model, leo)?;
        }
        return Ok(Operator::identity(model.joint_dim()));
    }
    cycle_unitary(model, schedule)?.pow(schedule.n_cycles).certify_unitary()
}

/// `exp(-i (H_C + H_perp) T)`.
pub fn decoupled_limit_unitary(model: &SystemBathModel, total_free_time: f64) -> Result<Operator> {
    hermitian_exponential(&model.decoupled_generator(), -total_free_time)
}

/// `||U_1(tau) - U_limit(2 tau)||_2` for a single pulsed cycle.
pub fn single_cycle_defect(
    model: &SystemBathModel,
    leo: &LeakageEliminationOperator,
    tau: f64,
) -> Result<f64> {
    let schedule = ParityKickSchedule::new(leo.clone(), 1, tau)?;
    let u = parity_kick_unitary(model, &schedule)?;
    let lim = decoupled_limit_unitary(model, 2.0 * tau)?;
    Ok(op_norm(&(&u - &lim), NormKind::Spectral))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub step: u64,
    pub elapsed_time: f64,
    pub leakage_population: f64,
    pub code_fidelity: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationReport {
    pub model_id: String,
    pub g: f64,
    pub bath_seed: u64,
    pub route: Option<String>,
    pub n_cycles: u64,
    pub segment_time: f64,
    pub total_free_time: f64,
    pub series: Vec<ReportRow>,
    pub distance_to_limit: f64,
}

impl SimulationReport {
    pub fn final_leakage(&self) -> f64 {
        self.series.last().map(|r| r.leakage_population).unwrap_or(0.0)
    }
}

fn joint_leakage(code: &CodeSubspace, bath_dim: usize, psi: &CVector) -> f64 {
    // ||(Q ⊗ I) psi||^2 = 1 - ||(P ⊗ I) psi||^2, computed directly from Q
    let q = code.complement_projector();
    let sd = code.ambient_dim();
    let mut total = 0.0;
    for b in 0..bath_dim {
        let slice = CVector::from_iterator(sd, (0..sd).map(|s| psi[s * bath_dim + b]));
        total += q.apply(&slice).norm_squared();
    }
    total.clamp(0.0, 1.0)
}

/// `Tr_B |psi><psi|` with the system as the leading tensor factor.
pub fn reduced_system_state(psi: &CVector, system_dim: usize, bath_dim: usize) -> CMatrix {
    let mut rho = CMatrix::zeros(system_dim, system_dim);
    for i in 0..system_dim {
        for j in 0..system_dim {
            let mut acc = C64::new(0.0, 0.0);
            for b in 0..bath_dim {
                acc += psi[i * bath_dim + b] * psi[j * bath_dim + b].conj();
            }
            rho[(i, j)] = acc;
        }
    }
    rho
}

fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let op = Operator::from_parts(
        sym,
        Tags {
            hermitian: true,
            ..Tags::default()
        },
    );
    let (values, vecs) = hermitian_eigen(&op)?;
    let mut scaled = vecs.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= C64::new(values[j].max(0.0).sqrt(), 0.0);
    }
    Ok(scaled * vecs.adjoint())
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(sigma) rho sqrt(sigma)))^2`, clamped to `[0, 1]`.
pub fn state_fidelity(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    let s = psd_sqrt(sigma)?;
    let inner = &s * rho * &s;
    let root = psd_sqrt(&inner)?;
    let tr = root.trace().re;
    Ok((tr * tr).clamp(0.0, 1.0))
}

/// Evolves `|psi> ⊗ |b_0>` cycle by cycle.
///
/// `leakage_population` is `<(Q ⊗ I)>`; `code_fidelity` is the fidelity of
/// the bath-traced state with the bath-traced decoupled-limit state, which
/// lies in the code.
pub fn simulate(
    model: &SystemBathModel,
    schedule: &ParityKickSchedule,
    initial_code_state: &CVector,
) -> Result<SimulationReport> {
    let psi0 = initial_joint_state(model, initial_code_state)?;
    let cycle = if schedule.n_cycles > 0 {
        cycle_unitary(model, schedule)?
    } else {
        if let Some(leo) = &schedule.pulses {
            check_pulses(model, leo)?;
        }
        Operator::identity(model.joint_dim())
    };
    let limit_step = decoupled_limit_unitary(model, 2.0 * schedule.segment_time)?;

    let (sd, bd) = (model.system_dim, model.bath_dim);
    let mut psi = psi0.clone();
    let mut target = psi0;
    let mut series = Vec::with_capacity(schedule.n_cycles as usize + 1);
    for step in 0..=schedule.n_cycles {
        if step > 0 {
            psi = cycle.apply(&psi);
            target = limit_step.apply(&target);
        }
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(LeoError::NotUnitary((norm - 1.0).abs()));
        }
        let rho = reduced_system_state(&psi, sd, bd);
        let sigma = reduced_system_state(&target, sd, bd);
        series.push(ReportRow {
            step,
            elapsed_time: 2.0 * step as f64 * schedule.segment_time,
            leakage_population: joint_leakage(&model.code, bd, &psi),
            code_fidelity: state_fidelity(&rho, &sigma)?,
        });
    }

    let total = cycle.pow(schedule.n_cycles);
    let limit = decoupled_limit_unitary(model, schedule.total_free_time())?;
    Ok(SimulationReport {
        model_id: model.id.clone(),
        g: model.g,
        bath_seed: model.bath_seed,
        route: schedule.pulses.as_ref().map(|l| l.route().to_string()),
        n_cycles: schedule.n_cycles,
        segment_time: schedule.segment_time,
        total_free_time: schedule.total_free_time(),
        series,
        distance_to_limit: op_norm(&(&total - &limit), NormKind::Spectral),
    })
}

fn initial_joint_state(model: &SystemBathModel, initial_code_state: &CVector) -> Result<CVector> {
    if initial_code_state.len() != model.system_dim {
        return Err(LeoError::DimensionMismatch {
            expected: model.system_dim,
            found: initial_code_state.len(),
        });
    }
    let norm = initial_code_state.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(LeoError::InvalidArgument(format!(
            "initial state must be normalized, norm = {norm}"
        )));
    }
    let leak = model.code.leakage_amplitude(initial_code_state);
    if leak > 1e-12 {
        return Err(LeoError::NotInCode(leak));
    }
    Ok(initial_code_state.kronecker(&model.initial_bath_state))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: u64,
    pub tau: f64,
    pub final_leakage: f64,
    pub distance_to_limit: f64,
}

/// One pulsed (or free, with `pulses = None`) run per `n` at fixed total
/// free time. Points run in parallel; rows come back ordered by `n`.
pub fn sweep_cycles(
    model: &SystemBathModel,
    pulses: Option<&LeakageEliminationOperator>,
    total_free_time: f64,
    n_list: &[u64],
    initial_code_state: &CVector,
) -> Result<Vec<SweepRow>> {
    if n_list.is_empty() {
        return Err(LeoError::InvalidArgument("n list is empty".into()));
    }
    if n_list[0] == 0 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LeoError::InvalidArgument(
            "n list must be positive and strictly ascending".into(),
        ));
    }
    let psi0 = initial_joint_state(model, initial_code_state)?;
    let limit = decoupled_limit_unitary(model, total_free_time)?;
    n_list
        .par_iter()
        .map(|&n| {
            let schedule = ParityKickSchedule::from_total_time(pulses.cloned(), n, total_free_time)?;
            let u = parity_kick_unitary(model, &schedule)?;
            let psi = u.apply(&psi0);
            Ok(SweepRow {
                n,
                tau: schedule.segment_time,
                final_leakage: joint_leakage(&model.code, model.bath_dim, &psi),
                distance_to_limit: op_norm(&(&u - &limit), NormKind::Spectral),
            })
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "loglog_slope: unequal lengths");
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    least_squares_slope(&lx, &ly)
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// CSV with header `step,elapsed_time,leakage_population,code_fidelity`.
pub fn write_report_csv<W: Write>(report: &SimulationReport, mut out: W) -> std::io::Result<()> {
    writeln!(out, "step,elapsed_time,leakage_population,code_fidelity")?;
    for r in &report.series {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e}",
            r.step, r.elapsed_time, r.leakage_population, r.code_fidelity
        )?;
    }
    Ok(())
}

/// CSV with header `n,tau,final_leakage,distance_to_limit`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "n,tau,final_leakage,distance_to_limit")?;
    for r in rows {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e}",
            r.n, r.tau, r.final_leakage, r.distance_to_limit
        )?;
    }
    Ok(())
}
