//! Solver parameters: step size, Mann/Halpern coefficients, averaging
//! weights, stopping tolerances and inner budgets.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::ProjectionBudget;
use crate::problem::ProblemInstance;
use crate::prox::InnerBudget;

/// Safety factor applied to the step bound when `rho` is left unset.
pub const DEFAULT_RHO_FACTOR: f64 = 0.8;

/// Step size used when the bifunction family imposes no bound.
pub const UNBOUNDED_DEFAULT_RHO: f64 = 1.0;

/// Coefficient sequence `α_n` of the Mann and Halpern steps.
///
/// Iterations are counted from `n = 0`; `k = n + 1` is the 1-based iteration
/// number used in the formulas below.
#[derive(Clone)]
pub enum AlphaSchedule {
    /// `1/(k + 1)`: 1/2, 1/3, 1/4, …
    Harmonic,
    /// `1/(k + 1)^p` with `p > 0`.
    Power(f64),
    /// `r^k` with `0 < r < 1`, floored at the smallest positive normal
    /// double so that long runs never see `α = 0`.
    Geometric(f64),
    Constant(f64),
    Custom {
        f: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
        /// Whether the sequence tends to zero.
        vanishing: bool,
    },
}

impl AlphaSchedule {
    pub fn value(&self, n: usize) -> f64 {
        let k = n as f64 + 1.0;
        match self {
            AlphaSchedule::Harmonic => 1.0 / (k + 1.0),
            AlphaSchedule::Power(p) => (k + 1.0).powf(-p),
            AlphaSchedule::Geometric(r) => r.powf(k).max(f64::MIN_POSITIVE),
            AlphaSchedule::Constant(a) => *a,
            AlphaSchedule::Custom { f, .. } => f(n),
        }
    }

    pub fn is_vanishing(&self) -> bool {
        match self {
            AlphaSchedule::Harmonic | AlphaSchedule::Power(_) | AlphaSchedule::Geometric(_) => true,
            AlphaSchedule::Constant(a) => *a == 0.0,
            AlphaSchedule::Custom { vanishing, .. } => *vanishing,
        }
    }

    pub fn check(&self) -> Result<()> {
        match self {
            AlphaSchedule::Power(p) if !(*p > 0.0) => Err(Error::config("power schedule needs exponent > 0")),
            AlphaSchedule::Geometric(r) if !(*r > 0.0 && *r < 1.0) => {
                Err(Error::config("geometric schedule needs ratio in (0, 1)"))
            }
            AlphaSchedule::Constant(a) if !(*a > 0.0 && *a < 1.0) => {
                Err(Error::config(format!("constant alpha must lie in (0, 1), got {a}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Debug for AlphaSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSchedule::Harmonic => write!(f, "Harmonic"),
            AlphaSchedule::Power(p) => write!(f, "Power({p})"),
            AlphaSchedule::Geometric(r) => write!(f, "Geometric({r})"),
            AlphaSchedule::Constant(a) => write!(f, "Constant({a})"),
            AlphaSchedule::Custom { vanishing, .. } => write!(f, "Custom {{ vanishing: {vanishing} }}"),
        }
    }
}

/// Weights `α_{n,0}, …, α_{n,M}` of the averaged variant.
#[derive(Clone)]
pub enum WeightSchedule {
    /// `1/(M + 1)` each.
    Uniform,
    /// `α_{n,0} = α_n` from the alpha schedule, the rest split evenly.
    FromAlpha,
    Fixed(Vec<f64>),
    Custom(Arc<dyn Fn(usize, usize) -> Vec<f64> + Send + Sync>),
}

impl WeightSchedule {
    pub fn weights(&self, n: usize, n_maps: usize, alpha: &AlphaSchedule) -> Vec<f64> {
        match self {
            WeightSchedule::Uniform => vec![1.0 / (n_maps as f64 + 1.0); n_maps + 1],
            WeightSchedule::FromAlpha => {
                let a = alpha.value(n);
                let rest = (1.0 - a) / n_maps as f64;
                std::iter::once(a).chain(std::iter::repeat_n(rest, n_maps)).collect()
            }
            WeightSchedule::Fixed(w) => w.clone(),
            WeightSchedule::Custom(f) => f(n, n_maps),
        }
    }
}

impl fmt::Debug for WeightSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSchedule::Uniform => write!(f, "Uniform"),
            WeightSchedule::FromAlpha => write!(f, "FromAlpha"),
            WeightSchedule::Fixed(w) => write!(f, "Fixed({w:?})"),
            WeightSchedule::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Checks one weight vector: length `M + 1`, entries in `[0, 1]`, sum 1.
pub fn check_weights(weights: &[f64], n_maps: usize) -> Result<()> {
    if weights.len() != n_maps + 1 {
        return Err(Error::config(format!(
            "averaging needs {} weights, got {}",
            n_maps + 1,
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
        return Err(Error::config(format!(
            "averaging weights must lie in [0, 1]: {weights:?}"
        )));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::config(format!("averaging weights must sum to 1, got {sum}")));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Step size; `None` picks `0.8 · min(1/(2c1), 1/(2c2))`.
    pub rho: Option<f64>,
    pub alpha: AlphaSchedule,
    pub weights: WeightSchedule,
    /// Stop once `‖x_{n+1} − x_n‖` or `‖ū_n − x_n‖` falls to this value.
    pub tol_step: f64,
    /// Optional stop on `‖x_{n+1} − x*‖` for problems with a known solution.
    pub tol_known: Option<f64>,
    pub max_iter: usize,
    pub workers: usize,
    pub prox_inner: InnerBudget,
    pub projection_inner: ProjectionBudget,
    /// Record every k-th iteration (the last one is always recorded).
    pub trace_every: usize,
    /// Keep the per-member residual vectors in each trace record.
    pub record_family_residuals: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rho: None,
            alpha: AlphaSchedule::Harmonic,
            weights: WeightSchedule::Uniform,
            tol_step: 1e-8,
            tol_known: None,
            max_iter: 10_000,
            workers: 1,
            prox_inner: InnerBudget::default(),
            projection_inner: ProjectionBudget::default(),
            trace_every: 1,
            record_family_residuals: true,
        }
    }
}

impl SolverConfig {
    /// Resolves the step size against the family's bound and rejects
    /// `rho >= min(1/(2c1), 1/(2c2))`.
    pub fn resolve_rho(&self, problem: &ProblemInstance) -> Result<f64> {
        let bound = problem.rho_bound();
        let rho = match self.rho {
            Some(r) => r,
            None if bound.is_finite() => DEFAULT_RHO_FACTOR * bound,
            None => UNBOUNDED_DEFAULT_RHO,
        };
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::config(format!("rho must be positive and finite, got {rho}")));
        }
        if rho >= bound {
            let (c1, c2) = problem.lipschitz();
            return Err(Error::config(format!(
                "rho = {rho} violates the step bound rho < min(1/(2c1), 1/(2c2)) = {bound} (c1 = {c1}, c2 = {c2})"
            )));
        }
        Ok(rho)
    }

    /// Rejects nonpositive tolerances, zero counts and invalid schedules.
    pub fn check(&self) -> Result<()> {
        if !(self.tol_step > 0.0) {
            return Err(Error::config("tol_step must be positive"));
        }
        if let Some(t) = self.tol_known {
            if !(t > 0.0) {
                return Err(Error::config("tol_known must be positive"));
            }
        }
        if self.max_iter == 0 || self.workers == 0 || self.trace_every == 0 {
            return Err(Error::config("max_iter, workers and trace_every must be at least 1"));
        }
        if !(self.prox_inner.tol > 0.0) || !(self.projection_inner.tol > 0.0) {
            return Err(Error::config("inner tolerances must be positive"));
        }
        self.alpha.check()
    }
}
