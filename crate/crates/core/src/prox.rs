//! Strongly convex extragradient subproblems
//! `argmin { rho f(param, v) + ½‖anchor − v‖² : v ∈ C }`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{vi_step, Bifunction, VectorField};
use crate::point::Point;
use crate::set::FeasibleSet;

/// Budget of the generic projected-subgradient inner solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerBudget {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for InnerBudget {
    fn default() -> Self {
        InnerBudget {
            max_iters: 500,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxResult {
    pub y: Point,
    /// Zero when the closed form was used.
    pub inner_iters: usize,
    /// Norm of the projected-gradient residual `y − P_C(y − ∇g(y))`; zero for
    /// closed forms.
    pub optimality_residual: f64,
    /// False when the inner solver ran out of budget before meeting its
    /// tolerance; `y` is then the last iterate.
    pub converged: bool,
}

impl ProxResult {
    fn exact(y: Point) -> Self {
        ProxResult {
            y,
            inner_iters: 0,
            optimality_residual: 0.0,
            converged: true,
        }
    }
}

/// Predictor/corrector pair of one extragradient step.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtragradientPair {
    pub y: ProxResult,
    pub z: ProxResult,
}

/// Membership slack accepted for the current iterate.
const MEMBERSHIP_TOL: f64 = 1e-8;

/// `argmin { rho f(x, v) + ½‖x − v‖² : v ∈ C }`.
pub fn prox_step(
    f: &dyn Bifunction,
    x: &Point,
    rho: f64,
    set: &FeasibleSet,
    budget: &InnerBudget,
) -> Result<ProxResult> {
    check_inputs(f, x, rho, set)?;
    solve_subproblem(f, x, x, rho, set, budget)
}

/// `y = prox_step(f, x)` and `z = argmin { rho f(y, v) + ½‖x − v‖² : v ∈ C }`.
pub fn extragradient_pair(
    f: &dyn Bifunction,
    x: &Point,
    rho: f64,
    set: &FeasibleSet,
    budget: &InnerBudget,
) -> Result<ExtragradientPair> {
    check_inputs(f, x, rho, set)?;
    let y = solve_subproblem(f, x, x, rho, set, budget)?;
    let z = solve_subproblem(f, &y.y, x, rho, set, budget)?;
    Ok(ExtragradientPair { y, z })
}

/// `P_C(x − rho A(x))`.
pub fn vi_prox(field: &dyn VectorField, x: &Point, rho: f64, set: &FeasibleSet) -> Result<Point> {
    if !(rho > 0.0) {
        return Err(Error::config(format!("rho must be positive, got {rho}")));
    }
    let y = vi_step(field, x, x, rho, set);
    if !y.is_finite() {
        return Err(Error::oracle("vector field returned a non-finite value"));
    }
    Ok(y)
}

fn check_inputs(f: &dyn Bifunction, x: &Point, rho: f64, set: &FeasibleSet) -> Result<()> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::config(format!("rho must be positive and finite, got {rho}")));
    }
    if x.dim() != f.dim() || x.dim() != set.dim() {
        return Err(Error::config("point, bifunction and feasible set dimensions differ"));
    }
    if !set.contains(x, MEMBERSHIP_TOL) {
        return Err(Error::config("prox point lies outside the feasible set"));
    }
    Ok(())
}

/// Solves `argmin { rho f(param, v) + ½‖anchor − v‖² : v ∈ C }`.
///
/// Uses the bifunction's closed form when it offers one for this set;
/// otherwise runs projected subgradient steps `1/(k+1)` on the 1-strongly
/// convex objective, warm-started at the anchor.
pub fn solve_subproblem(
    f: &dyn Bifunction,
    param: &Point,
    anchor: &Point,
    rho: f64,
    set: &FeasibleSet,
    budget: &InnerBudget,
) -> Result<ProxResult> {
    if let Some(y) = f.prox(param, anchor, rho, set) {
        if !y.is_finite() || y.dim() != anchor.dim() {
            return Err(Error::oracle("closed-form prox returned an invalid point"));
        }
        return Ok(ProxResult::exact(y));
    }
    if !f.has_subgradient() {
        return Err(Error::Capability(
            "bifunction offers neither a closed-form prox nor a subgradient".into(),
        ));
    }

    let gradient = |v: &Point| -> Result<Point> {
        let g = f
            .subgrad2(param, v)
            .ok_or_else(|| Error::Capability("subgradient oracle returned nothing".into()))?;
        if !g.is_finite() || g.dim() != v.dim() {
            return Err(Error::oracle("subgradient oracle returned an invalid point"));
        }
        Ok(g.scale(rho).add(&v.sub(anchor)))
    };

    let mut y = set.project(anchor);
    let mut iters = 0;
    let mut converged = false;
    for k in 0..budget.max_iters {
        let g = gradient(&y)?;
        let next = set.project(&y.axpy(-1.0 / (k as f64 + 1.0), &g));
        let change = next.dist(&y);
        y = next;
        iters = k + 1;
        if change < budget.tol {
            converged = true;
            break;
        }
    }
    let g = gradient(&y)?;
    let optimality_residual = y.dist(&set.project(&y.sub(&g)));
    Ok(ProxResult {
        y,
        inner_iters: iters,
        optimality_residual,
        converged,
    })
}
