//! Two-column `x y` files for external plotting.

use std::fmt::Write;

use leolab::dynamics::{SimulationReport, SweepRow};

use crate::config::PlotStyle;
use crate::CliError;

pub enum PlotSource<'a> {
    Report(&'a SimulationReport),
    Sweep(&'a [SweepRow]),
}

/// `timeseries`: elapsed time (or `n` for sweeps) against leakage.
/// `convergence`: `ln n` against `ln distance_to_limit` (sweeps only).
pub fn emit_plot_data(source: PlotSource<'_>, style: PlotStyle) -> Result<String, CliError> {
    let points: Vec<(f64, f64)> = match (source, style) {
        (PlotSource::Report(r), PlotStyle::Timeseries) => r
            .series
            .iter()
            .map(|row| (row.elapsed_time, row.leakage_population))
            .collect(),
        (PlotSource::Report(_), PlotStyle::Convergence) => {
            return Err(CliError::Validation(
                "convergence plots need a sweep table".into(),
            ))
        }
        (PlotSource::Sweep(rows), PlotStyle::Timeseries) => {
            rows.iter().map(|r| (r.n as f64, r.final_leakage)).collect()
        }
        (PlotSource::Sweep(rows), PlotStyle::Convergence) => {
            if let Some(r) = rows.iter().find(|r| r.distance_to_limit <= 0.0) {
                return Err(CliError::Validation(format!(
                    "distance_to_limit is zero at n = {}; no log-log data",
                    r.n
                )));
            }
            rows.iter()
                .map(|r| ((r.n as f64).ln(), r.distance_to_limit.ln()))
                .collect()
        }
    };
    if points.is_empty() {
        return Err(CliError::Validation("nothing to plot".into()));
    }
    let mut out = String::new();
    for (x, y) in points {
        writeln!(out, "{x:.16e} {y:.16e}").expect("string write");
    }
    Ok(out)
}
