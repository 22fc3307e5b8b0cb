use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::oracle::{Bifunction, NonexpansiveMap, VariationalBifunction, VectorField};
use crate::point::Point;
use crate::set::FeasibleSet;

/// A family of `N` bifunctions and `M` nonexpansive maps over a common set
/// `C`, together with the start point `x0` of the hybrid iteration.
#[derive(Clone)]
pub struct ProblemInstance {
    pub name: String,
    pub set: FeasibleSet,
    pub bifunctions: Vec<Arc<dyn Bifunction>>,
    pub maps: Vec<Arc<dyn NonexpansiveMap>>,
    pub start: Point,
    /// A point of the solution set, usually `P_F(x0)` for shipped problems.
    pub known_solution: Option<Point>,
    /// Sampling region for validation when `C` has no analytic bounding box.
    pub sample_box: Option<(Point, Point)>,
}

impl ProblemInstance {
    pub fn new(
        name: impl Into<String>,
        set: FeasibleSet,
        bifunctions: Vec<Arc<dyn Bifunction>>,
        maps: Vec<Arc<dyn NonexpansiveMap>>,
        start: Point,
    ) -> Result<Self> {
        let p = ProblemInstance {
            name: name.into(),
            set,
            bifunctions,
            maps,
            start,
            known_solution: None,
            sample_box: None,
        };
        p.check()?;
        Ok(p)
    }

    pub fn with_known_solution(mut self, x: Point) -> Result<Self> {
        if x.dim() != self.dim() || !x.is_finite() {
            return Err(Error::config("known solution has the wrong dimension or is not finite"));
        }
        self.known_solution = Some(x);
        Ok(self)
    }

    pub fn with_sample_box(mut self, lower: Point, upper: Point) -> Result<Self> {
        if lower.dim() != self.dim() || upper.dim() != self.dim() {
            return Err(Error::config("sample box has the wrong dimension"));
        }
        self.sample_box = Some((lower, upper));
        Ok(self)
    }

    pub fn with_start(mut self, start: Point) -> Result<Self> {
        self.start = start;
        self.check()?;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn n_bifunctions(&self) -> usize {
        self.bifunctions.len()
    }

    pub fn n_maps(&self) -> usize {
        self.maps.len()
    }

    /// `(max_i c1_i, max_i c2_i)`; the common constants of the family.
    pub fn lipschitz(&self) -> (f64, f64) {
        self.bifunctions.iter().fold((0.0, 0.0), |(a, b), f| {
            let (c1, c2) = f.lipschitz();
            (a.max(c1), b.max(c2))
        })
    }

    /// `min(1/(2 c1), 1/(2 c2))`, infinite when both constants vanish.
    pub fn rho_bound(&self) -> f64 {
        let (c1, c2) = self.lipschitz();
        let inv = |c: f64| if c > 0.0 { 1.0 / (2.0 * c) } else { f64::INFINITY };
        inv(c1).min(inv(c2))
    }

    /// Structural checks: dimensions agree, `N + M >= 1`, constants are valid
    /// and every bifunction can solve its subproblem.
    pub fn check(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::config("dimension must be positive"));
        }
        if self.bifunctions.is_empty() && self.maps.is_empty() {
            return Err(Error::config("need at least one bifunction or map (N + M >= 1)"));
        }
        for (i, f) in self.bifunctions.iter().enumerate() {
            if f.dim() != d {
                return Err(Error::config(format!(
                    "bifunction {i} has dimension {} but C has {d}",
                    f.dim()
                )));
            }
            let (c1, c2) = f.lipschitz();
            if !(c1 >= 0.0 && c2 >= 0.0) || !c1.is_finite() || !c2.is_finite() {
                return Err(Error::config(format!(
                    "bifunction {i} has invalid Lipschitz constants ({c1}, {c2})"
                )));
            }
            if !f.has_subgradient() && !f.has_closed_form() {
                return Err(Error::Capability(format!(
                    "bifunction {i} offers neither a closed-form prox nor a subgradient"
                )));
            }
        }
        for (j, s) in self.maps.iter().enumerate() {
            if s.dim() != d {
                return Err(Error::config(format!(
                    "map {j} has dimension {} but C has {d}",
                    s.dim()
                )));
            }
        }
        if self.start.dim() != d || !self.start.is_finite() {
            return Err(Error::config("start point has the wrong dimension or is not finite"));
        }
        if !self.set.contains(&self.start, 1e-9) {
            return Err(Error::config("start point lies outside the feasible set"));
        }
        Ok(())
    }
}

impl fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("set", &self.set)
            .field("n_bifunctions", &self.n_bifunctions())
            .field("n_maps", &self.n_maps())
            .field("start", &self.start)
            .field("known_solution", &self.known_solution)
            .finish()
    }
}

/// Input of the variational-inequality specialization: a family of
/// `L`-Lipschitz vector fields `A_i` over a common set.
#[derive(Clone)]
pub struct VariationalFamily {
    pub name: String,
    pub set: FeasibleSet,
    pub fields: Vec<Arc<dyn VectorField>>,
    pub lipschitz: f64,
    pub start: Point,
    pub known_solution: Option<Point>,
}

impl VariationalFamily {
    /// Embeds each field as `f_i(x, y) = ⟨A_i(x), y − x⟩` with `c1 = c2 = L/2`.
    pub fn to_problem(&self) -> Result<ProblemInstance> {
        if self.fields.is_empty() {
            return Err(Error::config("variational family needs at least one field"));
        }
        if !(self.lipschitz > 0.0) || !self.lipschitz.is_finite() {
            return Err(Error::config(format!(
                "Lipschitz constant must be positive, got {}",
                self.lipschitz
            )));
        }
        for (i, a) in self.fields.iter().enumerate() {
            if a.dim() != self.set.dim() {
                return Err(Error::config(format!(
                    "field {i} has dimension {} but C has {}",
                    a.dim(),
                    self.set.dim()
                )));
            }
        }
        let bifunctions = self
            .fields
            .iter()
            .map(|a| Arc::new(VariationalBifunction::new(a.clone(), self.lipschitz)) as Arc<dyn Bifunction>)
            .collect();
        let p = ProblemInstance::new(
            self.name.clone(),
            self.set.clone(),
            bifunctions,
            vec![],
            self.start.clone(),
        )?;
        match &self.known_solution {
            Some(x) => p.with_known_solution(x.clone()),
            None => Ok(p),
        }
    }
}

impl fmt::Debug for VariationalFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VariationalFamily")
            .field("name", &self.name)
            .field("set", &self.set)
            .field("members", &self.fields.len())
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}
