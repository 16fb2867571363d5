//! CSV and JSON writers.
//!
//! CSV files are UTF-8 with a header row; reals are written as `{:.15e}` (16 significant digits).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use efm_core::diagnostics::DiagnosticsRecord;
use serde::Serialize;

use crate::CliError;

pub const DIAGNOSTICS_HEADER: &str =
    "time,mass,momentum_1,momentum_2,momentum_3,energy,entropy,negative_nodes,positivity_error,min_value";

pub fn real(x: f64) -> String {
    format!("{x:.15e}")
}

pub struct CsvWriter {
    out: BufWriter<File>,
}

impl CsvWriter {
    pub fn create(path: &Path, header: &str) -> Result<Self, CliError> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{header}")?;
        Ok(Self { out })
    }

    pub fn row(&mut self, cells: &[String]) -> Result<(), CliError> {
        writeln!(self.out, "{}", cells.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.out.flush()?;
        Ok(())
    }
}

pub fn diagnostics_row(r: &DiagnosticsRecord) -> Vec<String> {
    vec![
        real(r.time),
        real(r.mass),
        real(r.momentum[0]),
        real(r.momentum[1]),
        real(r.momentum[2]),
        real(r.energy),
        real(r.entropy),
        r.negative_nodes.to_string(),
        real(r.positivity_error),
        real(r.min_value),
    ]
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.into()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_keep_sixteen_digits() {
        assert_eq!(real(0.1), "1.000000000000000e-1");
        let x = std::f64::consts::PI * 1e-7;
        assert!((real(x).parse::<f64>().unwrap() - x).abs() <= 1e-15 * x);
        assert_eq!(DIAGNOSTICS_HEADER.split(',').count(), 10);
    }
}
