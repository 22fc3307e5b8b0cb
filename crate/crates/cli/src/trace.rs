//! CSV traces: one row per recorded iteration.
//!
//! Floats are written in the shortest decimal form that parses back to the
//! same double, so reading a trace reproduces the written values exactly.
//! An unknown distance to the solution is an empty field.

use std::io::{Read, Write};

use equihybrid::TraceRecord;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const TRACE_COLUMNS: [&str; 7] = [
    "n",
    "step_residual",
    "u_residual",
    "max_z_residual",
    "max_fixed_point_residual",
    "dist_to_known",
    "wall_time_ms",
];

/// The columns of a [`TraceRecord`] that go to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub n: usize,
    pub step_residual: f64,
    pub u_residual: f64,
    pub max_z_residual: f64,
    pub max_fixed_point_residual: f64,
    pub dist_to_known: Option<f64>,
    pub wall_time_ms: f64,
}

impl From<&TraceRecord> for TraceRow {
    fn from(r: &TraceRecord) -> Self {
        TraceRow {
            n: r.n,
            step_residual: r.step_residual,
            u_residual: r.u_residual,
            max_z_residual: r.max_z_residual,
            max_fixed_point_residual: r.max_fixed_point_residual,
            dist_to_known: r.dist_to_known,
            wall_time_ms: r.wall_time_ms,
        }
    }
}

impl TraceRow {
    /// Bitwise equality, so that NaN fields compare equal to themselves.
    pub fn same_bits(&self, other: &TraceRow) -> bool {
        let bits = |r: &TraceRow| {
            (
                r.n,
                r.step_residual.to_bits(),
                r.u_residual.to_bits(),
                r.max_z_residual.to_bits(),
                r.max_fixed_point_residual.to_bits(),
                r.dist_to_known.map(f64::to_bits),
                r.wall_time_ms.to_bits(),
            )
        };
        bits(self) == bits(other)
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::config(format!("trace CSV: {e}"))
}

pub fn write_trace<W: Write>(out: W, records: &[TraceRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    if records.is_empty() {
        w.write_record(TRACE_COLUMNS).map_err(csv_error)?;
    }
    for r in records {
        w.serialize(TraceRow::from(r)).map_err(csv_error)?;
    }
    w.flush().map_err(|e| csv_error(e.into()))
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<TraceRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_string)
        .collect();
    if header != TRACE_COLUMNS {
        return Err(CliError::config(format!(
            "trace header {header:?} does not match {TRACE_COLUMNS:?}"
        )));
    }
    reader.deserialize().map(|row| row.map_err(csv_error)).collect()
}
