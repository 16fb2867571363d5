//! `efm convergence`: error ladders against the exact BKW solutions.
//!
//! `convergence.csv` columns: `angular_nodes,modes,effective_modes,box_half_width,l1,l1_rate,l2,l2_rate,linf,linf_rate,seconds`.
//! Rates compare each row with the previous one at the same `angular_nodes` and are empty on the
//! first row of each ladder.

use std::path::Path;

use efm_core::diagnostics::{convergence_rates, Norm};
use efm_core::Simulation;
use serde::Serialize;

use crate::output::{real, write_json, CsvWriter};
use crate::{CliError, RunConfig};

/// Final time of every ladder run.
pub const CONVERGENCE_TIME: f64 = 0.01;

pub const HEADER: &str =
    "angular_nodes,modes,effective_modes,box_half_width,l1,l1_rate,l2,l2_rate,linf,linf_rate,seconds";

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub angular_nodes: usize,
    pub modes: usize,
    pub effective_modes: usize,
    pub box_half_width: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    /// `[l1, l2, linf]` rates against the previous row of the same ladder.
    pub rates: Option<[f64; 3]>,
    pub seconds: f64,
}

impl ConvergenceRow {
    pub fn error(&self, norm: Norm) -> f64 {
        match norm {
            Norm::L1 => self.l1,
            Norm::L2 => self.l2,
            Norm::Linf => self.linf,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub config: RunConfig,
    pub t_end: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Rows of the ladder with `angular_nodes` quadrature nodes, in mode order.
    pub fn ladder(&self, angular_nodes: usize) -> Vec<&ConvergenceRow> {
        self.rows.iter().filter(|r| r.angular_nodes == angular_nodes).collect()
    }

    pub fn row(&self, angular_nodes: usize, modes: usize) -> Option<&ConvergenceRow> {
        self.rows
            .iter()
            .find(|r| r.angular_nodes == angular_nodes && r.modes == modes)
    }
}

/// Runs `template` to [`CONVERGENCE_TIME`] for each mode count and each angular node count.
/// An empty `angular_nodes` keeps the template's value.
pub fn cmd_convergence(
    template: &RunConfig,
    modes: &[usize],
    angular_nodes: &[usize],
) -> Result<ConvergenceTable, CliError> {
    if !template.problem.has_exact_solution() {
        return Err(CliError::Config(format!(
            "convergence needs an exact solution; `{}` has none",
            template.problem.name()
        )));
    }
    if modes.is_empty() {
        return Err(CliError::Config("no mode counts given".into()));
    }
    let nodes = if angular_nodes.is_empty() {
        vec![template.angular_nodes]
    } else {
        angular_nodes.to_vec()
    };
    let mut rows = Vec::new();
    for &m in &nodes {
        let mut ladder: Vec<ConvergenceRow> = Vec::new();
        for &n in modes {
            let mut config = template.clone();
            config.modes = n;
            config.angular_nodes = m;
            config.t_end = CONVERGENCE_TIME;
            config.field_times.clear();
            config.validate()?;
            let sim = Simulation::new(config.setup()?)?;
            let result = sim.run()?;
            let errors = result.errors.expect("exact solution is known");
            log::info!("M = {m}, N = {n}: l1 = {:.4e} ({:.1} s)", errors.l1, result.seconds);
            let rates = match ladder.last() {
                Some(prev) => {
                    let rate = |a: f64, b: f64| -> Result<f64, CliError> {
                        Ok(convergence_rates(&[prev.modes, n], &[a, b])?[0])
                    };
                    Some([
                        rate(prev.l1, errors.l1)?,
                        rate(prev.l2, errors.l2)?,
                        rate(prev.linf, errors.linf)?,
                    ])
                }
                None => None,
            };
            ladder.push(ConvergenceRow {
                angular_nodes: m,
                modes: n,
                effective_modes: sim.grid().modes(),
                box_half_width: sim.grid().box_half_width(),
                l1: errors.l1,
                l2: errors.l2,
                linf: errors.linf,
                rates,
                seconds: result.seconds,
            });
        }
        rows.extend(ladder);
    }
    let mut config = template.resolved();
    config.t_end = CONVERGENCE_TIME;
    Ok(ConvergenceTable {
        config,
        t_end: CONVERGENCE_TIME,
        rows,
    })
}

pub fn write_table(table: &ConvergenceTable, out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out)?;
    let mut csv = CsvWriter::create(&out.join("convergence.csv"), HEADER)?;
    for r in &table.rows {
        let rate = |i: usize| r.rates.map(|x| real(x[i])).unwrap_or_default();
        csv.row(&[
            r.angular_nodes.to_string(),
            r.modes.to_string(),
            r.effective_modes.to_string(),
            real(r.box_half_width),
            real(r.l1),
            rate(0),
            real(r.l2),
            rate(1),
            real(r.linf),
            rate(2),
            real(r.seconds),
        ])?;
    }
    csv.finish()?;
    write_json(&out.join("convergence.json"), table)
}
