//! Nash–Cournot oligopoly with taxes and a fee-induced fixed-point
//! constraint.
//!
//! Firm `j` produces `x_j ∈ [lo_j, hi_j]`, sells at the price
//! `p_j(s) = α_j − β_j s` with `s = Σ_k x_k`, and pays the convex tax
//! `c_j(x_j) = ½ τ_j x_j² + t_j x_j`. Its profit is
//! `f_j(x) = p_j(s) x_j − c_j(x_j)`, and the equilibrium bifunction is
//!
//! ```text
//! f(x, y) = Σ_j [f_j(x) − f_j(x[y_j])],
//! ```
//!
//! where `x[y_j]` replaces the `j`-th coordinate of `x` by `y_j`.
//!
//! Writing `B_jk = β_j` for `k ≠ j` and `B_jj = 0`,
//!
//! ```text
//! f(x, y) = q(y) − q(x) + (y − x)ᵀ B x,   q(y) = Σ_j (β_j + τ_j/2) y_j² + (t_j − α_j) y_j,
//! f(x, y) + f(y, z) − f(x, z) = (y − z)ᵀ B (x − y),
//! f(x, y) + f(y, x) = −(x − y)ᵀ B (x − y).
//! ```
//!
//! The second identity gives Lipschitz-type constants `c1 = c2 = ‖B‖₂ / 2`.
//! The third shows `f` is *not* monotone for two or more firms (`B` has a
//! zero diagonal and is indefinite). At the equilibrium `x*`, however,
//! `f(y, x*) = −(y − x*)ᵀ (D + B)(y − x*)` with `D = diag(β + τ/2)`, which
//! is nonpositive whenever `D + B` is positive semidefinite (for instance
//! equal slopes, where `D + B = diag(τ/2) + β 11ᵀ`). That is the property
//! the extragradient analysis actually uses.
//!
//! The fee `g_j(x) = ½ γ_j x² + h_j x + λ_j |x|` enters through the
//! nonexpansive map `P = (I + c ∂(g + ι_K))^{-1}`, whose fixed points are the
//! fee-minimizing production plans.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::oracle::{Bifunction, NonexpansiveMap};
use crate::point::Point;
use crate::problem::ProblemInstance;
use crate::set::FeasibleSet;

/// Convex fee `½ γ x² + h x + λ |x|` of one firm.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Fee {
    pub quadratic: f64,
    pub linear: f64,
    pub absolute: f64,
}

impl Fee {
    pub fn is_zero(&self) -> bool {
        self.quadratic == 0.0 && self.linear == 0.0 && self.absolute == 0.0
    }

    /// Quadratic fee `½ γ (x − center)²` up to a constant.
    pub fn centered(quadratic: f64, center: f64) -> Self {
        Fee {
            quadratic,
            linear: -quadratic * center,
            absolute: 0.0,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        0.5 * self.quadratic * x * x + self.linear * x + self.absolute * x.abs()
    }

    /// `argmin_u { c g(u) + ½ (u − x)² }` over `[lo, hi]`.
    pub fn prox(&self, x: f64, c: f64, lo: f64, hi: f64) -> f64 {
        let shifted = x - c * self.linear;
        let thresh = c * self.absolute;
        let soft = shifted.signum() * (shifted.abs() - thresh).max(0.0);
        (soft / (1.0 + c * self.quadratic)).clamp(lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CournotSpec {
    /// Price intercepts `α_j > 0`.
    pub intercepts: Vec<f64>,
    /// Price slopes `β_j > 0`.
    pub slopes: Vec<f64>,
    /// Quadratic tax coefficients `τ_j ≥ 0`.
    pub tax_quadratic: Vec<f64>,
    /// Linear tax coefficients `t_j`.
    pub tax_linear: Vec<f64>,
    pub fees: Vec<Fee>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Scale `c > 0` of the fee proximal map.
    pub prox_scale: f64,
    /// Start point; defaults to the lower bounds.
    pub start: Option<Vec<f64>>,
}

impl CournotSpec {
    /// `n` identical firms without taxes or fees on `[0, hi]^n`.
    pub fn symmetric(n: usize, alpha: f64, beta: f64, hi: f64) -> Self {
        CournotSpec {
            intercepts: vec![alpha; n],
            slopes: vec![beta; n],
            tax_quadratic: vec![0.0; n],
            tax_linear: vec![0.0; n],
            fees: vec![Fee::default(); n],
            lower: vec![0.0; n],
            upper: vec![hi; n],
            prox_scale: 1.0,
            start: None,
        }
    }

    pub fn firms(&self) -> usize {
        self.intercepts.len()
    }

    fn check(&self) -> Result<()> {
        let n = self.firms();
        if n == 0 {
            return Err(Error::config("cournot model needs at least one firm"));
        }
        let lens = [
            self.slopes.len(),
            self.tax_quadratic.len(),
            self.tax_linear.len(),
            self.fees.len(),
            self.lower.len(),
            self.upper.len(),
        ];
        if lens.iter().any(|&l| l != n) {
            return Err(Error::config(format!("every firm parameter list must have length {n}")));
        }
        if self.intercepts.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::config("price intercepts must be positive"));
        }
        if self.slopes.iter().any(|&b| !(b > 0.0 && b.is_finite())) {
            return Err(Error::config("price slopes must be positive"));
        }
        if self.tax_quadratic.iter().any(|&t| !(t >= 0.0 && t.is_finite()))
            || self.tax_linear.iter().any(|t| !t.is_finite())
        {
            return Err(Error::config("taxes must be convex: quadratic coefficients >= 0"));
        }
        if self.fees.iter().any(|f| {
            !(f.quadratic >= 0.0 && f.absolute >= 0.0)
                || !f.quadratic.is_finite()
                || !f.absolute.is_finite()
                || !f.linear.is_finite()
        }) {
            return Err(Error::config(
                "fees must be convex: quadratic and absolute coefficients >= 0",
            ));
        }
        if !(self.prox_scale > 0.0 && self.prox_scale.is_finite()) {
            return Err(Error::config("prox scale must be positive"));
        }
        Ok(())
    }

    /// `B_jk = β_j` off the diagonal, zero on it.
    pub fn interaction_matrix(&self) -> DMatrix<f64> {
        let n = self.firms();
        DMatrix::from_fn(n, n, |j, k| if j == k { 0.0 } else { self.slopes[j] })
    }

    /// `‖B‖₂ / 2`, shared by both Lipschitz-type constants.
    pub fn lipschitz_constant(&self) -> f64 {
        let b = self.interaction_matrix();
        let norm = b.singular_values().iter().copied().fold(0.0, f64::max);
        0.5 * norm
    }
}

/// Solves the first-order conditions `(β_j + τ_j) x_j + β_j s = α_j − t_j`
/// of the unconstrained game. Each firm's condition gives
/// `x_j = (r_j − β_j s) / (β_j + τ_j)` with `r_j = α_j − t_j`; summing fixes
/// `s (1 + Σ β_j/(β_j + τ_j)) = Σ r_j/(β_j + τ_j)`. Evaluating this closed form
/// firm by firm keeps symmetric markets exactly symmetric, which a general
/// linear solve does not. Returns `None` when the solution leaves the
/// strategy boxes.
pub fn interior_equilibrium(spec: &CournotSpec) -> Option<Point> {
    let n = spec.firms();
    let own: Vec<f64> = (0..n).map(|j| spec.slopes[j] + spec.tax_quadratic[j]).collect();
    let rhs: Vec<f64> = (0..n).map(|j| spec.intercepts[j] - spec.tax_linear[j]).collect();
    let weight: f64 = 1.0 + (0..n).map(|j| spec.slopes[j] / own[j]).sum::<f64>();
    let total = (0..n).map(|j| rhs[j] / own[j]).sum::<f64>() / weight;
    let x: Vec<f64> = (0..n).map(|j| (rhs[j] - spec.slopes[j] * total) / own[j]).collect();
    let inside = (0..n).all(|j| x[j].is_finite() && x[j] >= spec.lower[j] && x[j] <= spec.upper[j]);
    inside.then(|| Point::new(x))
}

/// Componentwise `(I + c ∂(g + ι_K))^{-1}` of the separable fee.
pub fn prox_separable_quadratic(fees: &[Fee], c: f64, lower: &[f64], upper: &[f64], x: &Point) -> Point {
    Point::new(
        (0..x.dim())
            .map(|j| fees[j].prox(x[j], c, lower[j], upper[j]))
            .collect(),
    )
}

/// The Cournot equilibrium bifunction.
#[derive(Debug, Clone)]
pub struct CournotBifunction {
    spec: CournotSpec,
    lipschitz: f64,
}

impl CournotBifunction {
    /// `f_j(x[v_j])` with `s` the total output of `x`.
    fn profit_replaced(&self, x: &Point, s: f64, j: usize, v: f64) -> f64 {
        let sp = &self.spec;
        let total = s - x[j] + v;
        (sp.intercepts[j] - sp.slopes[j] * total) * v - 0.5 * sp.tax_quadratic[j] * v * v - sp.tax_linear[j] * v
    }
}

impl Bifunction for CournotBifunction {
    fn dim(&self) -> usize {
        self.spec.firms()
    }

    fn eval(&self, x: &Point, y: &Point) -> f64 {
        let s: f64 = x.iter().sum();
        (0..self.dim())
            .map(|j| self.profit_replaced(x, s, j, x[j]) - self.profit_replaced(x, s, j, y[j]))
            .sum()
    }

    fn subgrad2(&self, x: &Point, y: &Point) -> Option<Point> {
        let sp = &self.spec;
        let s: f64 = x.iter().sum();
        Some(Point::new(
            (0..self.dim())
                .map(|j| {
                    (2.0 * sp.slopes[j] + sp.tax_quadratic[j]) * y[j] + sp.slopes[j] * (s - x[j]) - sp.intercepts[j]
                        + sp.tax_linear[j]
                })
                .collect(),
        ))
    }

    /// Separable quadratic: per firm, minimize
    /// `rho (a_j v² + b_j v) + ½ (v − anchor_j)²` over the box, with
    /// `a_j = β_j + τ_j/2` and `b_j = β_j (s − param_j) − α_j + t_j`.
    fn prox(&self, param: &Point, anchor: &Point, rho: f64, set: &FeasibleSet) -> Option<Point> {
        let FeasibleSet::Box { lower, upper } = set else {
            return None;
        };
        let sp = &self.spec;
        let s: f64 = param.iter().sum();
        Some(Point::new(
            (0..self.dim())
                .map(|j| {
                    let a = sp.slopes[j] + 0.5 * sp.tax_quadratic[j];
                    let b = sp.slopes[j] * (s - param[j]) - sp.intercepts[j] + sp.tax_linear[j];
                    ((anchor[j] - rho * b) / (1.0 + 2.0 * rho * a)).clamp(lower[j], upper[j])
                })
                .collect(),
        ))
    }

    fn has_subgradient(&self) -> bool {
        true
    }

    fn has_closed_form(&self) -> bool {
        true
    }

    fn lipschitz(&self) -> (f64, f64) {
        (self.lipschitz, self.lipschitz)
    }
}

/// The fee proximal map.
#[derive(Debug, Clone)]
pub struct FeeProx {
    fees: Vec<Fee>,
    scale: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl NonexpansiveMap for FeeProx {
    fn dim(&self) -> usize {
        self.fees.len()
    }

    fn apply(&self, x: &Point) -> Point {
        prox_separable_quadratic(&self.fees, self.scale, &self.lower, &self.upper, x)
    }
}

/// Builds the instance: one equilibrium bifunction and one fee map over
/// `K = Π_j [lo_j, hi_j]`. The known solution is the interior equilibrium
/// when it exists and is fixed by the fee map.
pub fn make_cournot(spec: &CournotSpec) -> Result<ProblemInstance> {
    spec.check()?;
    let set = FeasibleSet::boxed(spec.lower.clone(), spec.upper.clone())?;
    let bif = CournotBifunction {
        spec: spec.clone(),
        lipschitz: spec.lipschitz_constant(),
    };
    let map = FeeProx {
        fees: spec.fees.clone(),
        scale: spec.prox_scale,
        lower: spec.lower.clone(),
        upper: spec.upper.clone(),
    };
    let start = Point::new(spec.start.clone().unwrap_or_else(|| spec.lower.clone()));
    let known = interior_equilibrium(spec).filter(|x| map.apply(x).dist(x) <= 1e-12);
    let p = ProblemInstance::new(
        format!("cournot(n={})", spec.firms()),
        set,
        vec![Arc::new(bif)],
        vec![Arc::new(map)],
        start,
    )?;
    match known {
        Some(x) => p.with_known_solution(x),
        None => Ok(p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn duopoly() -> CournotSpec {
        CournotSpec::symmetric(2, 10.0, 1.0, 10.0)
    }

    #[test]
    fn symmetric_duopoly_equilibrium() {
        let x = interior_equilibrium(&duopoly()).unwrap();
        assert!((x[0] - 10.0 / 3.0).abs() < 1e-12 && (x[1] - 10.0 / 3.0).abs() < 1e-12);
        let p = make_cournot(&duopoly()).unwrap();
        assert_eq!(p.known_solution, Some(x));
    }

    #[test]
    fn zero_fee_prox_is_identity() {
        let f = Fee::default();
        for x in [0.0, 1.5, 9.0] {
            assert_eq!(f.prox(x, 0.7, 0.0, 10.0), x);
        }
    }

    #[test]
    fn quadratic_and_absolute_fee_prox() {
        let q = Fee {
            quadratic: 1.0,
            ..Fee::default()
        };
        assert_eq!(q.prox(3.0, 1.0, -10.0, 10.0), 1.5);
        let l1 = Fee {
            absolute: 1.0,
            ..Fee::default()
        };
        // Grid oracle for argmin ½(u − x)² + 0.5|u|.
        for x in [-2.0, -0.3, 0.0, 0.2, 0.5, 1.7] {
            let grid_best = (-3000..=3000)
                .map(|k| k as f64 * 1e-3)
                .min_by(|a, b| {
                    let obj = |u: f64| 0.5 * (u - x) * (u - x) + 0.5 * u.abs();
                    obj(*a).total_cmp(&obj(*b))
                })
                .unwrap();
            assert!((l1.prox(x, 0.5, -10.0, 10.0) - grid_best).abs() <= 1e-3, "x = {x}");
        }
    }

    #[test]
    fn bifunction_identities() {
        let spec = CournotSpec {
            slopes: vec![1.0, 2.0, 0.5],
            intercepts: vec![10.0, 12.0, 8.0],
            tax_quadratic: vec![0.5, 0.0, 1.0],
            tax_linear: vec![0.1, 0.2, 0.0],
            ..CournotSpec::symmetric(3, 1.0, 1.0, 5.0)
        };
        let bif = CournotBifunction {
            lipschitz: spec.lipschitz_constant(),
            spec: spec.clone(),
        };
        let b = spec.interaction_matrix();
        let pts = [
            Point::new(vec![0.5, 1.0, 2.0]),
            Point::new(vec![3.0, 0.0, 1.5]),
            Point::new(vec![1.0, 4.0, 0.2]),
        ];
        let quad = |u: &Point, v: &Point| -> f64 {
            let (u, v) = (
                nalgebra::DVector::from_column_slice(u),
                nalgebra::DVector::from_column_slice(v),
            );
            u.dot(&(&b * v))
        };
        let (x, y, z) = (&pts[0], &pts[1], &pts[2]);
        assert!(bif.eval(x, x).abs() < 1e-12);
        let sym = bif.eval(x, y) + bif.eval(y, x);
        assert!((sym + quad(&x.sub(y), &x.sub(y))).abs() < 1e-10);
        let tri = bif.eval(x, y) + bif.eval(y, z) - bif.eval(x, z);
        assert!((tri - quad(&y.sub(z), &x.sub(y))).abs() < 1e-10);
    }

    #[test]
    fn subgradient_matches_finite_difference() {
        let spec = duopoly();
        let bif = CournotBifunction {
            lipschitz: spec.lipschitz_constant(),
            spec,
        };
        let (x, y) = (Point::new(vec![1.0, 2.0]), Point::new(vec![3.0, 0.5]));
        let g = bif.subgrad2(&x, &y).unwrap();
        for j in 0..2 {
            let mut yp = y.clone().into_vec();
            yp[j] += 1e-6;
            let fd = (bif.eval(&x, &Point::new(yp)) - bif.eval(&x, &y)) / 1e-6;
            assert!((fd - g[j]).abs() < 1e-4);
        }
    }

    #[test]
    fn rejects_nonpositive_slope_and_nonconvex_fee() {
        let mut spec = duopoly();
        spec.slopes[1] = -1.0;
        assert!(make_cournot(&spec).is_err());
        let mut spec = duopoly();
        spec.fees[0].quadratic = -1.0;
        assert!(make_cournot(&spec).is_err());
    }
}
