//! Run summaries (JSON) and speedup reports (CSV and text).

use std::fmt::Write as _;
use std::io::Write;

use equihybrid::SolveResult;
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub problem: String,
    pub algorithm: String,
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub stop_reason: String,
    pub rho: f64,
    pub workers: usize,
    /// Solver time from the first iteration, excluding setup and I/O.
    pub solver_time_ms: f64,
    pub final_step_residual: Option<f64>,
    pub dist_to_known: Option<f64>,
    pub prox_warnings: usize,
    pub projection_warnings: usize,
    pub message: Option<String>,
}

impl Summary {
    pub fn new(problem: &str, workers: usize, r: &SolveResult) -> Self {
        let last = r.trace.last();
        Summary {
            problem: problem.to_string(),
            algorithm: r.algorithm.name().to_string(),
            solution: r.solution.to_vec(),
            iterations: r.iterations,
            stop_reason: r.stop_reason.name().to_string(),
            rho: r.rho,
            workers,
            solver_time_ms: r.elapsed.as_secs_f64() * 1e3,
            final_step_residual: last.map(|t| t.step_residual),
            dist_to_known: last.and_then(|t| t.dist_to_known),
            prox_warnings: r.prox_warnings,
            projection_warnings: r.projection_warnings,
            message: r.message.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

/// One tolerance and worker count of a speedup report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub tol: f64,
    pub workers: usize,
    pub iterations: usize,
    pub stop_reason: String,
    /// Median one-worker solver time, seconds.
    pub t_s: f64,
    /// Median solver time with `workers`, seconds.
    pub t_p: f64,
    /// `t_s / t_p`.
    pub speedup: f64,
    /// `speedup / workers`.
    pub efficiency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub problem: String,
    pub algorithm: String,
    pub repeats: usize,
    pub hardware: String,
    pub rows: Vec<BenchRow>,
}

/// Machine description printed with every report.
pub fn hardware_note() -> String {
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    format!(
        "{} {} with {cores} available core(s)",
        std::env::consts::OS,
        std::env::consts::ARCH
    )
}

impl BenchReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let err = |e: csv::Error| CliError::config(format!("bench CSV: {e}"));
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record([
            "tol",
            "workers",
            "iterations",
            "stop_reason",
            "t_s",
            "t_p",
            "speedup",
            "efficiency",
            "hardware",
        ])
        .map_err(err)?;
        for row in &self.rows {
            w.serialize((
                row.tol,
                row.workers,
                row.iterations,
                &row.stop_reason,
                row.t_s,
                row.t_p,
                row.speedup,
                row.efficiency,
                &self.hardware,
            ))
            .map_err(err)?;
        }
        w.flush().map_err(|e| err(e.into()))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} / {} — median of {} run(s)",
            self.problem, self.algorithm, self.repeats
        );
        let _ = writeln!(s, "hardware: {}", self.hardware);
        let _ = writeln!(
            s,
            "{:>8} {:>7} {:>10} {:>12} {:>12} {:>12} {:>8} {:>10}",
            "tol", "workers", "iterations", "stop", "T_s [s]", "T_p [s]", "S_p", "E_p"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:>8.0e} {:>7} {:>10} {:>12} {:>12.6} {:>12.6} {:>8.3} {:>10.3}",
                r.tol, r.workers, r.iterations, r.stop_reason, r.t_s, r.t_p, r.speedup, r.efficiency
            );
        }
        s
    }
}
