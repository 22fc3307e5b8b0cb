//! The parallel hybrid extragradient outer loops.
//!
//! All variants share one iteration skeleton:
//!
//! 1. per family member, the predictor `y_i` and corrector `z_i` (one fused
//!    parallel pass);
//! 2. `z̄`, the corrector farthest from `x_n`;
//! 3. the fixed-point stage, which differs per variant and produces `ū`;
//! 4. the progress cut `C_n` built from `ū` and the anchor cut `Q_n`;
//! 5. `x_{n+1} = P_{C ∩ C_n ∩ Q_n}(x0)`.
//!
//! Mann: `u_j = α x_n + (1 − α) S_j z̄`, `ū` farthest from `x_n`.
//! Halpern: `u_j = α x0 + (1 − α) S_j z̄`, `ū` farthest, Halpern-type cut.
//! Averaged: `ū = α_0 x_n + Σ α_j S_j z̄`.
//! Equilibrium-only and VI: `ū = z̄`.
//!
//! With `M = 0` every variant degenerates to the equilibrium-only iteration;
//! with `N = 0` the extragradient stage is skipped and `z̄ = x_n`.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::config::{check_weights, SolverConfig};
use crate::error::{Error, Result};
use crate::geometry::{anchor_cut, halpern_cut, mann_cut, project_intersection, HalfSpace};
use crate::parallel::{farthest_from, ParallelPlan};
use crate::point::Point;
use crate::problem::{ProblemInstance, VariationalFamily};
use crate::prox::extragradient_pair;

/// Steps at or below this length count as `x_{n+1} = x_n` exactly.
pub const EXACT_STEP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Mann,
    Halpern,
    Averaged,
    EquilibriumOnly,
    Vi,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Mann => "mann",
            Algorithm::Halpern => "halpern",
            Algorithm::Averaged => "averaged",
            Algorithm::EquilibriumOnly => "equilibrium_only",
            Algorithm::Vi => "vi",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "mann" => Algorithm::Mann,
            "halpern" => Algorithm::Halpern,
            "averaged" => Algorithm::Averaged,
            "equilibrium_only" => Algorithm::EquilibriumOnly,
            "vi" => Algorithm::Vi,
            other => return Err(Error::config(format!("unknown algorithm '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    StepTol,
    /// `‖x_{n+1} − x_n‖ <= EXACT_STEP`; the iterate is certified a solution.
    FixedPointExact,
    /// Distance to the known solution fell below `tol_known`.
    KnownTol,
    MaxIter,
    InfeasibleCut,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::StepTol => "step_tol",
            StopReason::FixedPointExact => "fixed_point_exact",
            StopReason::KnownTol => "known_tol",
            StopReason::MaxIter => "max_iter",
            StopReason::InfeasibleCut => "infeasible_cut",
        }
    }
}

/// One iteration `x_n → x_{n+1}`. Residuals are measured at `x_n`; `x` and
/// `dist_to_known` refer to the produced iterate `x_{n+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub n: usize,
    pub x: Point,
    /// `‖x_{n+1} − x_n‖`
    pub step_residual: f64,
    /// `‖ū_n − x_n‖`
    pub u_residual: f64,
    /// `‖z_n^i − x_n‖` per bifunction; empty unless family residuals are recorded.
    pub z_residuals: Vec<f64>,
    /// `‖S_j x_n − x_n‖` per map; empty unless family residuals are recorded.
    pub fixed_point_residuals: Vec<f64>,
    pub max_z_residual: f64,
    pub max_fixed_point_residual: f64,
    pub dist_to_known: Option<f64>,
    /// Elapsed solver time at the end of this iteration.
    pub wall_time_ms: f64,
}

impl TraceRecord {
    /// Bitwise comparison of everything except timing.
    pub fn same_numerics(&self, other: &TraceRecord) -> bool {
        fn bits(v: &[f64]) -> Vec<u64> {
            v.iter().map(|x| x.to_bits()).collect()
        }
        self.n == other.n
            && bits(&self.x) == bits(&other.x)
            && self.step_residual.to_bits() == other.step_residual.to_bits()
            && self.u_residual.to_bits() == other.u_residual.to_bits()
            && bits(&self.z_residuals) == bits(&other.z_residuals)
            && bits(&self.fixed_point_residuals) == bits(&other.fixed_point_residuals)
            && self.max_z_residual.to_bits() == other.max_z_residual.to_bits()
            && self.max_fixed_point_residual.to_bits() == other.max_fixed_point_residual.to_bits()
            && self.dist_to_known.map(f64::to_bits) == other.dist_to_known.map(f64::to_bits)
    }
}

/// True when both traces agree bitwise in everything but timing.
pub fn traces_identical(a: &[TraceRecord], b: &[TraceRecord]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(r, s)| r.same_numerics(s))
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub algorithm: Algorithm,
    pub solution: Point,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub trace: Vec<TraceRecord>,
    pub rho: f64,
    /// Solver time from the first iteration; excludes setup.
    pub elapsed: Duration,
    /// Inner prox solves that exhausted their budget.
    pub prox_warnings: usize,
    /// Dykstra projections that exhausted their budget.
    pub projection_warnings: usize,
    pub message: Option<String>,
}

/// Everything computed during one iteration, handed to observers.
pub struct IterationView<'a> {
    pub n: usize,
    pub x0: &'a Point,
    pub x: &'a Point,
    pub rho: f64,
    pub alpha: f64,
    pub ys: &'a [Point],
    pub zs: &'a [Point],
    pub z_bar_index: Option<usize>,
    pub z_bar: &'a Point,
    /// Mann/Halpern candidates `u_j`, or the images `S_j z̄` for the averaged
    /// variant.
    pub us: &'a [Point],
    pub u_bar: &'a Point,
    pub progress_cut: &'a HalfSpace,
    pub anchor_cut: &'a HalfSpace,
    pub x_next: &'a Point,
}

pub fn solve_mann(p: &ProblemInstance, cfg: &SolverConfig) -> Result<SolveResult> {
    solve(p, cfg, Algorithm::Mann)
}

pub fn solve_halpern(p: &ProblemInstance, cfg: &SolverConfig) -> Result<SolveResult> {
    solve(p, cfg, Algorithm::Halpern)
}

pub fn solve_averaged(p: &ProblemInstance, cfg: &SolverConfig) -> Result<SolveResult> {
    solve(p, cfg, Algorithm::Averaged)
}

pub fn solve_equilibrium_only(p: &ProblemInstance, cfg: &SolverConfig) -> Result<SolveResult> {
    solve(p, cfg, Algorithm::EquilibriumOnly)
}

/// Parallel extragradient for `N` variational inequalities with closed-form
/// projections: `y_i = P_C(x − ρ A_i x)`, `z_i = P_C(x − ρ A_i y_i)`.
pub fn solve_vi(family: &VariationalFamily, cfg: &SolverConfig) -> Result<SolveResult> {
    solve_vi_observed(family, cfg, &mut |_| {})
}

pub fn solve_vi_observed(
    family: &VariationalFamily,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&IterationView<'_>),
) -> Result<SolveResult> {
    let problem = family.to_problem()?;
    let bound = 1.0 / family.lipschitz;
    let rho = cfg.rho.unwrap_or(crate::config::DEFAULT_RHO_FACTOR * bound);
    if !(rho > 0.0 && rho < bound) {
        return Err(Error::config(format!(
            "rho = {rho} violates 0 < rho < 1/L = {bound} (L = {})",
            family.lipschitz
        )));
    }
    let cfg = SolverConfig {
        rho: Some(rho),
        ..cfg.clone()
    };
    solve_observed(&problem, &cfg, Algorithm::Vi, observer)
}

pub fn solve(p: &ProblemInstance, cfg: &SolverConfig, algorithm: Algorithm) -> Result<SolveResult> {
    solve_observed(p, cfg, algorithm, &mut |_| {})
}

/// Runs `algorithm`, calling `observer` after every iteration.
pub fn solve_observed(
    p: &ProblemInstance,
    cfg: &SolverConfig,
    algorithm: Algorithm,
    observer: &mut dyn FnMut(&IterationView<'_>),
) -> Result<SolveResult> {
    cfg.check()?;
    p.check()?;
    let rho = cfg.resolve_rho(p)?;
    let n_bif = p.n_bifunctions();
    let n_maps = p.n_maps();

    match algorithm {
        Algorithm::EquilibriumOnly | Algorithm::Vi => {
            if n_maps != 0 || n_bif == 0 {
                return Err(Error::config(format!(
                    "{} needs N >= 1 bifunctions and no maps (got N = {n_bif}, M = {n_maps})",
                    algorithm.name()
                )));
            }
        }
        Algorithm::Halpern if !cfg.alpha.is_vanishing() => {
            return Err(Error::config(format!(
                "halpern needs alpha_n -> 0, but {:?} does not vanish",
                cfg.alpha
            )));
        }
        Algorithm::Averaged if n_maps > 0 => {
            check_weights(&cfg.weights.weights(0, n_maps, &cfg.alpha), n_maps)?;
        }
        _ => {}
    }
    // Only Mann, Halpern and averaged variants with maps use the fixed-point stage.
    let fixed_point_stage =
        n_maps > 0 && matches!(algorithm, Algorithm::Mann | Algorithm::Halpern | Algorithm::Averaged);

    let plan = ParallelPlan::new(cfg.workers)?;
    let x0 = p.start.clone();
    let mut x = x0.clone();
    let mut trace = Vec::new();
    let mut prox_warnings = 0;
    let mut projection_warnings = 0;
    let started = Instant::now();

    for n in 0..cfg.max_iter {
        let alpha = cfg.alpha.value(n);
        if fixed_point_stage && !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::config(format!("alpha_{n} = {alpha} lies outside (0, 1)")));
        }

        // Steps 1-2, fused per member.
        let pairs = plan.try_map(n_bif, |i| {
            extragradient_pair(p.bifunctions[i].as_ref(), &x, rho, &p.set, &cfg.prox_inner)
        })?;
        let mut ys = Vec::with_capacity(n_bif);
        let mut zs = Vec::with_capacity(n_bif);
        for pair in pairs {
            prox_warnings += usize::from(!pair.y.converged) + usize::from(!pair.z.converged);
            ys.push(pair.y.y);
            zs.push(pair.z.y);
        }

        // Step 3.
        let (z_bar_index, z_bar) = if zs.is_empty() {
            (None, x.clone())
        } else {
            let (i, _) = farthest_from(&zs, &x)?;
            (Some(i), zs[i].clone())
        };

        // Steps 4-5.
        let (us, u_bar) = if fixed_point_stage {
            let images = plan.map(n_maps, |j| p.maps[j].apply(&z_bar));
            if let Some(j) = images.iter().position(|u| u.dim() != x.dim() || !u.is_finite()) {
                return Err(Error::oracle(format!("map {j} returned an invalid point")));
            }
            match algorithm {
                Algorithm::Mann => {
                    let us = plan.map(n_maps, |j| x.combine(alpha, &images[j], 1.0 - alpha));
                    let (j, _) = farthest_from(&us, &x)?;
                    let u_bar = us[j].clone();
                    (us, u_bar)
                }
                Algorithm::Halpern => {
                    let us = plan.map(n_maps, |j| x0.combine(alpha, &images[j], 1.0 - alpha));
                    let (j, _) = farthest_from(&us, &x)?;
                    let u_bar = us[j].clone();
                    (us, u_bar)
                }
                _ => {
                    let w = cfg.weights.weights(n, n_maps, &cfg.alpha);
                    check_weights(&w, n_maps)?;
                    let mut u = x.combine(w[0], &images[0], w[1]);
                    for (img, wj) in images.iter().zip(&w[1..]).skip(1) {
                        u = u.axpy(*wj, img);
                    }
                    (images, u)
                }
            }
        } else {
            (Vec::new(), z_bar.clone())
        };

        // Step 6.
        let progress = if fixed_point_stage && algorithm == Algorithm::Halpern {
            halpern_cut(&x0, &x, &u_bar, alpha)?
        } else {
            mann_cut(&x, &u_bar)
        };
        let anchor = anchor_cut(&x0, &x);

        // Step 7.
        let projection =
            match project_intersection(&p.set, &[progress.clone(), anchor.clone()], &x0, &cfg.projection_inner) {
                Ok(r) => r,
                Err(Error::Infeasible(msg)) => {
                    return Ok(SolveResult {
                        algorithm,
                        solution: x,
                        iterations: n,
                        stop_reason: StopReason::InfeasibleCut,
                        trace,
                        rho,
                        elapsed: started.elapsed(),
                        prox_warnings,
                        projection_warnings,
                        message: Some(msg),
                    });
                }
                Err(e) => return Err(e),
            };
        projection_warnings += usize::from(!projection.converged);
        let x_next = projection.point;

        let fixed_point_residuals: Vec<f64> = plan.map(n_maps, |j| p.maps[j].apply(&x).dist(&x));
        let z_residuals: Vec<f64> = zs.iter().map(|z| z.dist(&x)).collect();
        let step = x_next.dist(&x);
        let u_residual = u_bar.dist(&x);
        let dist_to_known = p.known_solution.as_ref().map(|k| x_next.dist(k));

        observer(&IterationView {
            n,
            x0: &x0,
            x: &x,
            rho,
            alpha,
            ys: &ys,
            zs: &zs,
            z_bar_index,
            z_bar: &z_bar,
            us: &us,
            u_bar: &u_bar,
            progress_cut: &progress,
            anchor_cut: &anchor,
            x_next: &x_next,
        });

        let stop = if algorithm != Algorithm::Halpern && step <= EXACT_STEP {
            Some(StopReason::FixedPointExact)
        } else if matches!((cfg.tol_known, dist_to_known), (Some(t), Some(d)) if d <= t) {
            Some(StopReason::KnownTol)
        } else if step <= cfg.tol_step || u_residual <= cfg.tol_step {
            Some(StopReason::StepTol)
        } else if n + 1 == cfg.max_iter {
            Some(StopReason::MaxIter)
        } else {
            None
        };

        if n % cfg.trace_every == 0 || stop.is_some() {
            let max_of = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
            let (max_z_residual, max_fixed_point_residual) = (max_of(&z_residuals), max_of(&fixed_point_residuals));
            let keep = cfg.record_family_residuals;
            trace.push(TraceRecord {
                n,
                x: x_next.clone(),
                step_residual: step,
                u_residual,
                z_residuals: if keep { z_residuals } else { Vec::new() },
                fixed_point_residuals: if keep { fixed_point_residuals } else { Vec::new() },
                max_z_residual,
                max_fixed_point_residual,
                dist_to_known,
                wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
            });
        }

        x = x_next;
        if let Some(stop_reason) = stop {
            return Ok(SolveResult {
                algorithm,
                solution: x,
                iterations: n + 1,
                stop_reason,
                trace,
                rho,
                elapsed: started.elapsed(),
                prox_warnings,
                projection_warnings,
                message: None,
            });
        }
    }
    unreachable!("the last iteration always stops with max_iter")
}
