//! `efm run`: one configured simulation with diagnostics, slices and a summary.
//!
//! Files written to the output directory:
//!
//! * `diagnostics.csv`: one row per observed step, columns as in [`DIAGNOSTICS_HEADER`].
//! * `slices.csv`: `time,v1,value,exact` along the `v_1` axis at the start, at every
//!   `field_times` entry and at the end; `exact` is empty when no exact solution is known.
//! * `field_<k>.csv`: `v1,v2,value` on the `v_3 = 0` plane at the `k`-th entry of `field_times`.
//! * `summary.json`: see [`RunSummary`].

use std::path::Path;

use efm_core::diagnostics::{DiagnosticsRecord, ErrorNorms};
use efm_core::solver::slice_v1;
use efm_core::{GridSpec, Simulation};
use serde::Serialize;

use crate::output::{diagnostics_row, real, write_json, CsvWriter, DIAGNOSTICS_HEADER};
use crate::{CliError, RunConfig};

#[derive(Debug, Clone, Serialize)]
pub struct GridSummary {
    pub dim: usize,
    pub requested_modes: usize,
    pub modes: usize,
    pub box_half_width: f64,
    pub spacing: f64,
}

impl GridSummary {
    pub fn of(grid: &GridSpec) -> Self {
        Self {
            dim: grid.dim(),
            requested_modes: grid.requested_modes(),
            modes: grid.modes(),
            box_half_width: grid.box_half_width(),
            spacing: grid.spacing(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub version: &'static str,
    /// Fully resolved configuration; feeding it back to `efm run` repeats the run.
    pub config: RunConfig,
    pub grid: GridSummary,
    pub steps: usize,
    pub initial: DiagnosticsRecord,
    pub last: DiagnosticsRecord,
    pub max_positivity_error: f64,
    pub relative_mass_drift: f64,
    /// Largest entropy increase between consecutive records (negative when strictly dissipated).
    pub max_entropy_increase: Option<f64>,
    /// Errors against the exact solution at the final time, when one is known.
    pub errors: Option<ErrorNorms>,
    pub seconds: f64,
}

/// Runs `config`, writing artifacts into `out`.
pub fn cmd_run(config: &RunConfig, out: &Path) -> Result<RunSummary, CliError> {
    std::fs::create_dir_all(out)?;
    let sim = Simulation::new(config.setup()?)?;
    let grid = sim.grid().clone();
    let problem = config.problem;
    let dt = config.dt;

    let mut diagnostics = CsvWriter::create(&out.join("diagnostics.csv"), DIAGNOSTICS_HEADER)?;
    let mut slices = CsvWriter::create(&out.join("slices.csv"), "time,v1,value,exact")?;
    let mut pending: Vec<(usize, f64)> = config.field_times.iter().copied().enumerate().collect();
    let mut field_error = None;

    let write_slice = |slices: &mut CsvWriter, time: f64, values: &[f64]| -> Result<(), CliError> {
        for (v1, value) in slice_v1(&grid, values)? {
            let exact = problem
                .exact(time, &[v1, 0.0, 0.0])
                .map(real)
                .unwrap_or_default();
            slices.row(&[real(time), real(v1), real(value), exact])?;
        }
        Ok(())
    };

    let result = sim.run_with(|record, values| {
        let io = (|| -> Result<(), CliError> {
            diagnostics.row(&diagnostics_row(record))?;
            let due: Vec<usize> = pending
                .iter()
                .filter(|(_, t)| (record.time - t).abs() <= 0.5 * dt)
                .map(|(k, _)| *k)
                .collect();
            if record.time == 0.0 || !due.is_empty() {
                write_slice(&mut slices, record.time, values)?;
            }
            for k in due {
                write_field(&out.join(format!("field_{k}.csv")), &grid, values)?;
                pending.retain(|(j, _)| *j != k);
            }
            Ok(())
        })();
        // the observer speaks the solver's error type; stop the run and report the real cause below
        io.map_err(|e| {
            let message = e.to_string();
            field_error = Some(e);
            efm_core::Error::Setup(message)
        })
    });
    if let Some(err) = field_error {
        return Err(err);
    }
    let result = result?;
    let last = *result.records.last().expect("the initial state is always observed");
    if last.time != 0.0 {
        write_slice(&mut slices, last.time, &result.final_values)?;
    }
    diagnostics.finish()?;
    slices.finish()?;

    let initial = result.records[0];
    let summary = RunSummary {
        version: env!("CARGO_PKG_VERSION"),
        config: config.resolved(),
        grid: GridSummary::of(&grid),
        steps: config.time().steps(),
        initial,
        last,
        max_positivity_error: result.records.iter().map(|r| r.positivity_error).fold(0.0, f64::max),
        relative_mass_drift: result
            .records
            .iter()
            .map(|r| ((r.mass - initial.mass) / initial.mass).abs())
            .fold(0.0, f64::max),
        max_entropy_increase: result
            .records
            .windows(2)
            .map(|w| w[1].entropy - w[0].entropy)
            .reduce(f64::max),
        errors: result.errors,
        seconds: result.seconds,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

fn write_field(path: &Path, grid: &GridSpec, values: &[f64]) -> Result<(), CliError> {
    let mut csv = CsvWriter::create(path, "v1,v2,value")?;
    for (i, v) in grid.nodes().enumerate() {
        if v[2] == 0.0 {
            csv.row(&[real(v[0]), real(v[1]), real(values[i])])?;
        }
    }
    csv.finish()
}
