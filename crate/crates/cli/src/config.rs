//! Run configurations.
//!
//! ```ini
//! [problem]
//! ; paper-1d | cournot | affine-vi | zero
//! kind = paper-1d
//! bifunctions = 100
//! maps = 100
//!
//! [solver]
//! ; mann | halpern | averaged | equilibrium_only | vi
//! algorithm = mann
//! tol_step = 1e-5
//! ; harmonic | power:P | geometric:R | constant:A
//! alpha = harmonic
//!
//! [output]
//! trace = trace.csv
//! summary = summary.json
//! ```
//!
//! Comments take whole lines starting with `;` or `#`. Relative output
//! paths are resolved against the directory holding the configuration file.
//! The environment variable `EQUIHYBRID_WORKERS` overrides
//! `[solver] workers`.

use std::path::{Path, PathBuf};

use equihybrid::problems::{
    interior_equilibrium, make_affine_vi, make_cournot, make_paper_1d, make_zero_problem, random_affine_vi_spec,
    AffineViSpec, CournotSpec, Fee, Paper1DSpec,
};
use equihybrid::solvers::{solve, solve_vi};
use equihybrid::{
    Algorithm, AlphaSchedule, InnerBudget, Point, ProblemInstance, ProjectionBudget, SolveResult, SolverConfig,
    VariationalFamily, WeightSchedule,
};

use crate::error::{CliError, Result};
use crate::ini::{Document, Reader};

/// Environment variable that overrides the configured worker count.
pub const WORKERS_ENV: &str = "EQUIHYBRID_WORKERS";

const SECTIONS: [&str; 5] = ["problem", "solver", "output", "bench", "validate"];

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Paper1D(Paper1DSpec),
    Cournot(CournotSpec),
    AffineVi(AffineViSpec),
    Zero { start: Vec<f64> },
}

impl ProblemSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ProblemSpec::Paper1D(_) => "paper-1d",
            ProblemSpec::Cournot(_) => "cournot",
            ProblemSpec::AffineVi(_) => "affine-vi",
            ProblemSpec::Zero { .. } => "zero",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputPaths {
    pub trace: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    /// CSV bench report; the text form goes next to it with a `.txt` extension.
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSettings {
    /// Parallel worker counts compared against one worker.
    pub workers: Vec<usize>,
    /// Timed repetitions per configuration; the median is reported.
    pub repeats: usize,
    pub tolerances: Vec<f64>,
}

impl Default for BenchSettings {
    fn default() -> Self {
        BenchSettings {
            workers: vec![2],
            repeats: 3,
            tolerances: vec![1e-5, 1e-6, 1e-8],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidateSettings {
    pub samples: usize,
    pub seed: u64,
}

impl Default for ValidateSettings {
    fn default() -> Self {
        ValidateSettings { samples: 200, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub algorithm: Algorithm,
    pub solver: SolverConfig,
    pub output: OutputPaths,
    pub bench: BenchSettings,
    pub validate: ValidateSettings,
}

/// A built problem, in the form its solvers take.
pub enum Instance {
    Equilibrium(ProblemInstance),
    Variational(VariationalFamily),
}

impl Instance {
    pub fn solve(&self, cfg: &SolverConfig, algorithm: Algorithm) -> Result<SolveResult> {
        let result = match (self, algorithm) {
            (Instance::Variational(family), Algorithm::Vi) => solve_vi(family, cfg)?,
            (Instance::Variational(family), alg) => solve(&family.to_problem()?, cfg, alg)?,
            (Instance::Equilibrium(_), Algorithm::Vi) => {
                return Err(CliError::config("algorithm vi needs kind = affine-vi"));
            }
            (Instance::Equilibrium(problem), alg) => solve(problem, cfg, alg)?,
        };
        Ok(result)
    }

    /// The equilibrium form, used by validation.
    pub fn problem(&self) -> Result<ProblemInstance> {
        match self {
            Instance::Equilibrium(p) => Ok(p.clone()),
            Instance::Variational(f) => Ok(f.to_problem()?),
        }
    }
}

impl RunConfig {
    /// Reads a configuration file and applies `EQUIHYBRID_WORKERS`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io("cannot read config", path, e))?;
        let mut cfg = RunConfig::parse(&text)?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        cfg.apply_worker_override(std::env::var(WORKERS_ENV).ok().as_deref())?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc = Document::parse(text)?;
        doc.check_sections(&SECTIONS)?;

        let mut r = doc.reader("problem");
        let problem = parse_problem(&mut r)?;
        r.finish()?;

        let mut r = doc.reader("solver");
        let (algorithm, solver) = parse_solver(&mut r, &problem)?;
        r.finish()?;

        let mut r = doc.reader("output");
        let output = OutputPaths {
            trace: r.raw("trace").map(PathBuf::from),
            summary: r.raw("summary").map(PathBuf::from),
            report: r.raw("report").map(PathBuf::from),
        };
        r.finish()?;

        let mut r = doc.reader("bench");
        let defaults = BenchSettings::default();
        let bench = BenchSettings {
            workers: r.list("workers")?.unwrap_or(defaults.workers),
            repeats: r.get_or("repeats", defaults.repeats)?,
            tolerances: r.list("tolerances")?.unwrap_or(defaults.tolerances),
        };
        r.finish()?;
        if bench.workers.is_empty() || bench.workers.contains(&0) || bench.repeats == 0 {
            return Err(CliError::config(
                "[bench] workers must be positive and repeats at least 1",
            ));
        }
        if bench.tolerances.iter().any(|t| !(*t > 0.0)) {
            return Err(CliError::config("[bench] tolerances must be positive"));
        }

        let mut r = doc.reader("validate");
        let d = ValidateSettings::default();
        let validate = ValidateSettings {
            samples: r.get_or("samples", d.samples)?,
            seed: r.get_or("seed", d.seed)?,
        };
        r.finish()?;

        solver.check().map_err(|e| CliError::config(e.to_string()))?;
        Ok(RunConfig {
            problem,
            algorithm,
            solver,
            output,
            bench,
            validate,
        })
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        for path in [
            &mut self.output.trace,
            &mut self.output.summary,
            &mut self.output.report,
        ]
        .into_iter()
        .flatten()
        {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }

    /// Applies a worker-count override such as the value of `EQUIHYBRID_WORKERS`.
    pub fn apply_worker_override(&mut self, value: Option<&str>) -> Result<()> {
        let Some(value) = value else { return Ok(()) };
        let workers: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|w| *w >= 1)
            .ok_or_else(|| CliError::config(format!("{WORKERS_ENV} must be a positive integer, got {value:?}")))?;
        self.solver.workers = workers;
        self.bench.workers = vec![workers];
        Ok(())
    }

    pub fn build(&self) -> Result<Instance> {
        let instance = match &self.problem {
            ProblemSpec::Paper1D(spec) => Instance::Equilibrium(make_paper_1d(spec)?),
            ProblemSpec::Cournot(spec) => Instance::Equilibrium(make_cournot(spec)?),
            ProblemSpec::AffineVi(spec) => Instance::Variational(make_affine_vi(spec)?),
            ProblemSpec::Zero { start } => {
                Instance::Equilibrium(make_zero_problem(start.len(), Point::new(start.clone()))?)
            }
        };
        Ok(instance)
    }
}

fn parse_problem(r: &mut Reader<'_>) -> Result<ProblemSpec> {
    let kind = r
        .raw("kind")
        .ok_or_else(|| CliError::config("[problem] kind is required"))?;
    match kind {
        "paper-1d" => {
            let mut spec = Paper1DSpec::new(r.get_or("bifunctions", 100)?, r.get_or("maps", 100)?);
            spec.xi = r.list("thresholds")?;
            spec.start = r.get_or("start", spec.start)?;
            Ok(ProblemSpec::Paper1D(spec))
        }
        "cournot" => {
            let n: usize = r.get_or("firms", 2)?;
            if n == 0 {
                return Err(CliError::config("[problem] firms must be at least 1"));
            }
            let mut spec = CournotSpec::symmetric(n, 10.0, 1.0, 10.0);
            spec.intercepts = r.broadcast("intercepts", n, 10.0)?;
            spec.slopes = r.broadcast("slopes", n, 1.0)?;
            spec.tax_quadratic = r.broadcast("tax_quadratic", n, 0.0)?;
            spec.tax_linear = r.broadcast("tax_linear", n, 0.0)?;
            spec.lower = r.broadcast("lower", n, 0.0)?;
            spec.upper = r.broadcast("upper", n, 10.0)?;
            spec.prox_scale = r.get_or("prox_scale", 1.0)?;
            spec.start = r.list("start")?;
            let quadratic = r.broadcast("fee_quadratic", n, 0.0)?;
            let absolute = r.broadcast("fee_absolute", n, 0.0)?;
            let linear = match (r.raw("fee_center"), r.raw("fee_linear").is_some()) {
                (Some(_), true) => return Err(CliError::config("[problem] fee_center and fee_linear are exclusive")),
                (Some("equilibrium"), false) => {
                    let x = interior_equilibrium(&spec)
                        .ok_or_else(|| CliError::config("fee_center = equilibrium needs an interior equilibrium"))?;
                    (0..n).map(|j| Fee::centered(quadratic[j], x[j]).linear).collect()
                }
                (Some(_), false) => {
                    let centers = r.broadcast("fee_center", n, 0.0)?;
                    (0..n).map(|j| Fee::centered(quadratic[j], centers[j]).linear).collect()
                }
                (None, _) => r.broadcast("fee_linear", n, 0.0)?,
            };
            spec.fees = (0..n)
                .map(|j| Fee {
                    quadratic: quadratic[j],
                    linear: linear[j],
                    absolute: absolute[j],
                })
                .collect();
            Ok(ProblemSpec::Cournot(spec))
        }
        "affine-vi" => {
            let dim: usize = r.get_or("dim", 3)?;
            let fields: usize = r.get_or("fields", 3)?;
            if dim == 0 || fields == 0 {
                return Err(CliError::config("[problem] dim and fields must be at least 1"));
            }
            let mut spec = random_affine_vi_spec(dim, fields, r.get_or("seed", 0)?);
            if let Some(start) = r.list("start")? {
                spec.start = start;
            }
            Ok(ProblemSpec::AffineVi(spec))
        }
        "zero" => {
            let dim: usize = r.get_or("dim", 1)?;
            let start = r.broadcast("start", dim, 0.5)?;
            if start.is_empty() {
                return Err(CliError::config("[problem] dim must be at least 1"));
            }
            Ok(ProblemSpec::Zero { start })
        }
        other => Err(CliError::config(format!(
            "[problem] kind = {other:?}; expected paper-1d, cournot, affine-vi or zero"
        ))),
    }
}

fn parse_solver(r: &mut Reader<'_>, problem: &ProblemSpec) -> Result<(Algorithm, SolverConfig)> {
    let algorithm = match r.raw("algorithm") {
        None => match problem {
            ProblemSpec::AffineVi(_) => Algorithm::Vi,
            _ => Algorithm::Mann,
        },
        Some(name) => name
            .parse()
            .map_err(|e| CliError::config(format!("[solver] algorithm: {e}")))?,
    };
    let mut cfg = match problem {
        ProblemSpec::Paper1D(spec) => spec.solver_config(),
        _ => SolverConfig::default(),
    };
    if let Some(rho) = r.get("rho")? {
        cfg.rho = Some(rho);
    }
    if let Some(alpha) = r.raw("alpha") {
        cfg.alpha = parse_alpha(alpha)?;
    }
    if let Some(weights) = r.raw("weights") {
        cfg.weights = match weights {
            "uniform" => WeightSchedule::Uniform,
            "from_alpha" => WeightSchedule::FromAlpha,
            list => WeightSchedule::Fixed(
                list.split(',')
                    .map(|w| w.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| CliError::config(format!("[solver] weights = {list:?}: {e}")))?,
            ),
        };
    }
    cfg.tol_step = r.get_or("tol_step", cfg.tol_step)?;
    cfg.tol_known = r.get("tol_known")?;
    cfg.max_iter = r.get_or("max_iter", cfg.max_iter)?;
    cfg.workers = r.get_or("workers", cfg.workers)?;
    cfg.trace_every = r.get_or("trace_every", cfg.trace_every)?;
    cfg.record_family_residuals = r.get_or("record_family_residuals", cfg.record_family_residuals)?;
    let d = InnerBudget::default();
    cfg.prox_inner = InnerBudget {
        max_iters: r.get_or("prox_max_iters", d.max_iters)?,
        tol: r.get_or("prox_tol", d.tol)?,
    };
    let d = ProjectionBudget::default();
    cfg.projection_inner = ProjectionBudget {
        max_sweeps: r.get_or("projection_max_sweeps", d.max_sweeps)?,
        tol: r.get_or("projection_tol", d.tol)?,
    };
    Ok((algorithm, cfg))
}

fn parse_alpha(text: &str) -> Result<AlphaSchedule> {
    let bad = || {
        CliError::config(format!(
            "[solver] alpha = {text:?}; expected harmonic, power:P, geometric:R or constant:A"
        ))
    };
    if text == "harmonic" {
        return Ok(AlphaSchedule::Harmonic);
    }
    let (name, value) = text.split_once(':').ok_or_else(bad)?;
    let value: f64 = value.trim().parse().map_err(|_| bad())?;
    let schedule = match name.trim() {
        "power" => AlphaSchedule::Power(value),
        "geometric" => AlphaSchedule::Geometric(value),
        "constant" => AlphaSchedule::Constant(value),
        _ => return Err(bad()),
    };
    schedule.check().map_err(|e| CliError::config(e.to_string()))?;
    Ok(schedule)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_paper_config_uses_the_family_defaults() {
        let cfg = RunConfig::parse("[problem]\nkind = paper-1d\n").unwrap();
        let ProblemSpec::Paper1D(spec) = &cfg.problem else {
            panic!()
        };
        assert_eq!((spec.n_bifunctions, spec.n_maps), (100, 100));
        assert_eq!(cfg.solver.rho, Some(0.2));
        assert_eq!(cfg.algorithm, Algorithm::Mann);
        assert_eq!(cfg.bench, BenchSettings::default());
    }

    #[test]
    fn solver_keys_are_applied() {
        let cfg = RunConfig::parse(
            "[problem]\nkind = zero\ndim = 2\n[solver]\nalgorithm = halpern\nalpha = geometric:0.5\ntol_step = 1e-6\n\
             max_iter = 7\nworkers = 3\ntol_known = 1e-4\nweights = 0.5, 0.5\n",
        )
        .unwrap();
        assert_eq!(cfg.algorithm, Algorithm::Halpern);
        assert!(matches!(cfg.solver.alpha, AlphaSchedule::Geometric(r) if r == 0.5));
        assert_eq!(
            (cfg.solver.tol_step, cfg.solver.max_iter, cfg.solver.workers),
            (1e-6, 7, 3)
        );
        assert_eq!(cfg.solver.tol_known, Some(1e-4));
        assert!(matches!(&cfg.solver.weights, WeightSchedule::Fixed(w) if w == &vec![0.5, 0.5]));
        assert_eq!(cfg.problem, ProblemSpec::Zero { start: vec![0.5, 0.5] });
    }

    #[test]
    fn unknown_keys_and_sections_are_config_errors() {
        for text in [
            "[problem]\nkind = zero\ncolour = red\n",
            "[problem]\nkind = zero\n[solver]\ntol = 1e-5\n",
            "[problem]\nkind = zero\n[extras]\n",
            "[solver]\nalgorithm = mann\n",
            "[problem]\nkind = sphere\n",
            "[problem]\nkind = zero\n[solver]\nalgorithm = newton\n",
            "[problem]\nkind = zero\n[solver]\nalpha = constant:1.5\n",
            "[problem]\nkind = zero\n[solver]\nmax_iter = 0\n",
            "[problem]\nkind = zero\n[bench]\nworkers = 0\n",
        ] {
            let err = RunConfig::parse(text).unwrap_err();
            assert!(matches!(err, CliError::Config(_)), "{text:?} gave {err}");
        }
    }

    #[test]
    fn cournot_fee_centre_at_equilibrium() {
        let cfg =
            RunConfig::parse("[problem]\nkind = cournot\nfee_quadratic = 0.5\nfee_center = equilibrium\n").unwrap();
        let ProblemSpec::Cournot(spec) = &cfg.problem else {
            panic!()
        };
        let x = interior_equilibrium(&CournotSpec::symmetric(2, 10.0, 1.0, 10.0)).unwrap();
        assert!((x[0] - 10.0 / 3.0).abs() < 1e-15);
        for (j, fee) in spec.fees.iter().enumerate() {
            assert_eq!(*fee, Fee::centered(0.5, x[j]));
        }
        assert!(RunConfig::parse("[problem]\nkind = cournot\nfee_center = 1\nfee_linear = 2\n").is_err());
    }

    #[test]
    fn broadcast_lists_must_match_the_firm_count() {
        let cfg =
            RunConfig::parse("[problem]\nkind = cournot\nfirms = 3\nintercepts = 12, 10, 14\nslopes = 0.8\n").unwrap();
        let ProblemSpec::Cournot(spec) = &cfg.problem else {
            panic!()
        };
        assert_eq!(spec.intercepts, vec![12.0, 10.0, 14.0]);
        assert_eq!(spec.slopes, vec![0.8; 3]);
        assert!(RunConfig::parse("[problem]\nkind = cournot\nfirms = 3\nintercepts = 1, 2\n").is_err());
    }

    #[test]
    fn worker_override_replaces_config_and_bench_workers() {
        let mut cfg = RunConfig::parse("[problem]\nkind = zero\n[solver]\nworkers = 2\n").unwrap();
        cfg.apply_worker_override(None).unwrap();
        assert_eq!(cfg.solver.workers, 2);
        cfg.apply_worker_override(Some(" 6 ")).unwrap();
        assert_eq!((cfg.solver.workers, cfg.bench.workers.clone()), (6, vec![6]));
        assert!(cfg.apply_worker_override(Some("0")).is_err());
        assert!(cfg.apply_worker_override(Some("lots")).is_err());
    }

    #[test]
    fn relative_outputs_resolve_against_the_config_directory() {
        let mut cfg =
            RunConfig::parse("[problem]\nkind = zero\n[output]\ntrace = t.csv\nsummary = /abs/s.json\n").unwrap();
        cfg.resolve_paths(Path::new("/runs/a"));
        assert_eq!(cfg.output.trace, Some(PathBuf::from("/runs/a/t.csv")));
        assert_eq!(cfg.output.summary, Some(PathBuf::from("/abs/s.json")));
    }

    #[test]
    fn vi_algorithm_needs_a_variational_problem() {
        let cfg = RunConfig::parse("[problem]\nkind = zero\n[solver]\nalgorithm = vi\n").unwrap();
        let err = cfg.build().unwrap().solve(&cfg.solver, cfg.algorithm).err().unwrap();
        assert!(matches!(err, CliError::Config(_)));
        let cfg = RunConfig::parse("[problem]\nkind = affine-vi\ndim = 2\nfields = 1\n").unwrap();
        assert_eq!(cfg.algorithm, Algorithm::Vi);
        cfg.build().unwrap().solve(&cfg.solver, cfg.algorithm).unwrap();
    }
}
