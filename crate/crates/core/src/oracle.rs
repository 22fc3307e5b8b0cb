//! Oracle contracts for bifunctions, nonexpansive maps and vector fields.
//!
//! Every oracle is treated as a pure function: the solvers call them
//! concurrently from several workers on distinct inputs.

use std::fmt;
use std::sync::Arc;

use crate::point::Point;
use crate::set::FeasibleSet;

/// A bifunction `f: C × C → R` with `f(x, x) = 0`, together with the data the
/// extragradient steps need.
///
/// The subproblem oracle is phrased with a separate parameter and anchor,
/// `argmin { rho f(param, v) + ½‖anchor − v‖² : v ∈ C }`, because the
/// corrector step evaluates `f` at the predictor while keeping the quadratic
/// anchored at the current iterate.
pub trait Bifunction: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &Point, y: &Point) -> f64;

    /// An element of the subdifferential of `f(x, ·)` at `y`.
    fn subgrad2(&self, _x: &Point, _y: &Point) -> Option<Point> {
        None
    }

    /// Exact minimizer of the regularized subproblem, when a closed form
    /// exists for this feasible set. Returning `None` falls back to the
    /// generic inner solver.
    fn prox(&self, _param: &Point, _anchor: &Point, _rho: f64, _set: &FeasibleSet) -> Option<Point> {
        None
    }

    fn has_subgradient(&self) -> bool;

    fn has_closed_form(&self) -> bool;

    /// Lipschitz-type constants `(c1, c2)`.
    fn lipschitz(&self) -> (f64, f64);
}

/// A nonexpansive mapping `S: C → C`.
pub trait NonexpansiveMap: Send + Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &Point) -> Point;
}

/// A single-valued operator `A: C → R^d` of a variational inequality.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &Point) -> Point;
}

/// `f ≡ 0`; every point of `C` solves the equilibrium problem.
#[derive(Debug, Clone)]
pub struct ZeroBifunction {
    pub dim: usize,
}

impl Bifunction for ZeroBifunction {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, _x: &Point, _y: &Point) -> f64 {
        0.0
    }

    fn subgrad2(&self, _x: &Point, _y: &Point) -> Option<Point> {
        Some(Point::zeros(self.dim))
    }

    fn prox(&self, _param: &Point, anchor: &Point, _rho: f64, set: &FeasibleSet) -> Option<Point> {
        Some(set.project(anchor))
    }

    fn has_subgradient(&self) -> bool {
        true
    }

    fn has_closed_form(&self) -> bool {
        true
    }

    fn lipschitz(&self) -> (f64, f64) {
        (0.0, 0.0)
    }
}

#[derive(Debug, Clone)]
pub struct IdentityMap {
    pub dim: usize,
}

impl NonexpansiveMap for IdentityMap {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &Point) -> Point {
        x.clone()
    }
}

/// `f(x, y) = ⟨A(x), y − x⟩` for a vector field `A` with Lipschitz constant `L`.
///
/// Both subproblems reduce to projections: the minimizer of
/// `rho ⟨A(p), v − p⟩ + ½‖a − v‖²` over `C` is `P_C(a − rho A(p))`.
pub struct VariationalBifunction {
    field: Arc<dyn VectorField>,
    lipschitz: f64,
}

impl VariationalBifunction {
    pub fn new(field: Arc<dyn VectorField>, lipschitz: f64) -> Self {
        VariationalBifunction { field, lipschitz }
    }

    pub fn field(&self) -> &Arc<dyn VectorField> {
        &self.field
    }
}

impl fmt::Debug for VariationalBifunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VariationalBifunction")
            .field("dim", &self.field.dim())
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

impl Bifunction for VariationalBifunction {
    fn dim(&self) -> usize {
        self.field.dim()
    }

    fn eval(&self, x: &Point, y: &Point) -> f64 {
        self.field.apply(x).dot(&y.sub(x))
    }

    fn subgrad2(&self, x: &Point, _y: &Point) -> Option<Point> {
        Some(self.field.apply(x))
    }

    fn prox(&self, param: &Point, anchor: &Point, rho: f64, set: &FeasibleSet) -> Option<Point> {
        Some(vi_step(self.field.as_ref(), param, anchor, rho, set))
    }

    fn has_subgradient(&self) -> bool {
        true
    }

    fn has_closed_form(&self) -> bool {
        true
    }

    fn lipschitz(&self) -> (f64, f64) {
        (0.5 * self.lipschitz, 0.5 * self.lipschitz)
    }
}

/// `P_C(anchor − rho A(param))`
pub(crate) fn vi_step(field: &dyn VectorField, param: &Point, anchor: &Point, rho: f64, set: &FeasibleSet) -> Point {
    set.project(&anchor.axpy(-rho, &field.apply(param)))
}
