//! The `run`, `bench` and `validate` subcommands.
//!
//! Each `execute_*` function does the work on a parsed configuration and is
//! what the tests drive; the `cmd_*` wrappers add file loading and output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use equihybrid::solvers::traces_identical;
use equihybrid::{validate_problem, SolveResult, StopReason, ValidationReport};

use crate::config::RunConfig;
use crate::error::{CliError, ExitStatus, Result};
use crate::report::{hardware_note, BenchReport, BenchRow, Summary};
use crate::trace::write_trace;

pub struct RunOutcome {
    pub result: SolveResult,
    pub summary: Summary,
    pub status: ExitStatus,
}

/// Writes to stdout; a reader that closed the pipe early is not an error.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("warning: cannot write to stdout: {e}");
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io("cannot create directory", dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io("cannot create", path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    use std::io::Write;
    create(path)?
        .write_all(text.as_bytes())
        .map_err(|e| CliError::io("cannot write", path, e))
}

/// Solves the configured problem and writes the configured trace and summary.
pub fn execute_run(cfg: &RunConfig) -> Result<RunOutcome> {
    let instance = cfg.build()?;
    let result = instance.solve(&cfg.solver, cfg.algorithm)?;
    let summary = Summary::new(cfg.problem.kind(), cfg.solver.workers, &result);
    if let Some(path) = &cfg.output.trace {
        write_trace(create(path)?, &result.trace)?;
    }
    if let Some(path) = &cfg.output.summary {
        write_text(path, &(summary.to_json() + "\n"))?;
    }
    let status = if result.stop_reason == StopReason::InfeasibleCut {
        ExitStatus::InfeasibleCut
    } else {
        ExitStatus::Ok
    };
    Ok(RunOutcome {
        result,
        summary,
        status,
    })
}

pub fn cmd_run(config: &Path, trace: Option<PathBuf>, summary: Option<PathBuf>) -> Result<ExitStatus> {
    let mut cfg = RunConfig::load(config)?;
    cfg.output.trace = trace.or(cfg.output.trace);
    cfg.output.summary = summary.or(cfg.output.summary);
    let outcome = execute_run(&cfg)?;
    emit(&format!("{}\n", outcome.summary.to_json()));
    if let Some(msg) = &outcome.result.message {
        eprintln!("{msg}");
    }
    Ok(outcome.status)
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

/// Times `repeats` solves with `workers` and checks every trace against
/// `reference` (or the first run, when no reference is given).
fn timed_runs(
    cfg: &RunConfig,
    instance: &crate::config::Instance,
    tol: f64,
    workers: usize,
    reference: Option<&SolveResult>,
) -> Result<(f64, SolveResult)> {
    let solver = equihybrid::SolverConfig {
        tol_step: tol,
        workers,
        ..cfg.solver.clone()
    };
    let mut times = Vec::with_capacity(cfg.bench.repeats);
    let mut first: Option<SolveResult> = None;
    for _ in 0..cfg.bench.repeats {
        let r = instance.solve(&solver, cfg.algorithm)?;
        if r.stop_reason == StopReason::InfeasibleCut {
            return Err(CliError::Solver(equihybrid::Error::Infeasible(
                r.message.unwrap_or_else(|| "projection target became empty".into()),
            )));
        }
        // Instant has nanosecond resolution; the floor only guards the ratio.
        times.push(r.elapsed.as_secs_f64().max(1e-9));
        let against = reference.or(first.as_ref());
        if let Some(base) = against {
            if !traces_identical(&base.trace, &r.trace) || base.solution != r.solution {
                return Err(CliError::Determinism(format!(
                    "tol {tol:e}: the trace with {workers} worker(s) differs from the one-worker trace"
                )));
            }
        }
        first.get_or_insert(r);
    }
    Ok((median(times), first.expect("at least one repeat")))
}

/// Table of one-worker against multi-worker solver times per tolerance.
pub fn execute_bench(cfg: &RunConfig) -> Result<BenchReport> {
    let instance = cfg.build()?;
    let mut rows = Vec::new();
    for &tol in &cfg.bench.tolerances {
        let (t_s, sequential) = timed_runs(cfg, &instance, tol, 1, None)?;
        for &workers in &cfg.bench.workers {
            let t_p = if workers == 1 {
                t_s
            } else {
                timed_runs(cfg, &instance, tol, workers, Some(&sequential))?.0
            };
            let speedup = t_s / t_p;
            rows.push(BenchRow {
                tol,
                workers,
                iterations: sequential.iterations,
                stop_reason: sequential.stop_reason.name().to_string(),
                t_s,
                t_p,
                speedup,
                efficiency: speedup / workers as f64,
            });
        }
    }
    Ok(BenchReport {
        problem: cfg.problem.kind().to_string(),
        algorithm: cfg.algorithm.name().to_string(),
        repeats: cfg.bench.repeats,
        hardware: hardware_note(),
        rows,
    })
}

pub fn cmd_bench(config: &Path, workers: Option<Vec<usize>>, report: Option<PathBuf>) -> Result<ExitStatus> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(w) = workers {
        if w.is_empty() || w.contains(&0) {
            return Err(CliError::config("--workers needs positive counts"));
        }
        cfg.bench.workers = w;
    }
    cfg.output.report = report.or(cfg.output.report);
    let bench = execute_bench(&cfg)?;
    let text = bench.to_text();
    if let Some(path) = &cfg.output.report {
        bench.write_csv(create(path)?)?;
        write_text(&path.with_extension("txt"), &text)?;
    }
    emit(&text);
    Ok(ExitStatus::Ok)
}

pub fn execute_validate(cfg: &RunConfig) -> Result<ValidationReport> {
    let problem = cfg.build()?.problem()?;
    Ok(validate_problem(
        &problem,
        &cfg.solver,
        cfg.validate.samples,
        cfg.validate.seed,
    )?)
}

pub fn cmd_validate(config: &Path) -> Result<ExitStatus> {
    let cfg = RunConfig::load(config)?;
    let report = execute_validate(&cfg)?;
    emit(&format!(
        "{}\n",
        serde_json::to_string_pretty(&report).expect("report serializes")
    ));
    Ok(if report.passed {
        ExitStatus::Ok
    } else {
        ExitStatus::ValidationFailed
    })
}
