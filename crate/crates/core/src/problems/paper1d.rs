//! The one-dimensional test family on `C = [0, 1]`:
//!
//! * `f_i(x, y) = B_i(x)(y − x)` with `B_i(x) = 0` for `x ≤ ξ_i` and
//!   `B_i(x) = exp(x − ξ_i) + sin(x − ξ_i) − 1` otherwise, so that
//!   `EP(f_i) = [0, ξ_i]`;
//! * `S_j x = x^j sin^{j−1}(x) / (2j − 1)`, with `S_1` the identity and
//!   `F(S_j) = {0}` for `j ≥ 2`.
//!
//! Each `B_i` is nondecreasing and 4-Lipschitz on `[0, 1]`, which gives
//! monotone bifunctions with Lipschitz-type constants `c1 = c2 = 2`.

use std::sync::Arc;

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::oracle::{Bifunction, NonexpansiveMap};
use crate::point::Point;
use crate::problem::ProblemInstance;
use crate::set::FeasibleSet;

/// Lipschitz-type constant of every `f_i`.
pub const PAPER_1D_LIPSCHITZ: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Paper1DSpec {
    pub n_bifunctions: usize,
    pub n_maps: usize,
    /// Thresholds `ξ_1 < … < ξ_N` in `(0, 1)`; `None` uses `ξ_i = i/(N + 1)`.
    pub xi: Option<Vec<f64>>,
    pub start: f64,
    pub rho: f64,
}

impl Paper1DSpec {
    pub fn new(n_bifunctions: usize, n_maps: usize) -> Self {
        Paper1DSpec {
            n_bifunctions,
            n_maps,
            xi: None,
            start: 1.0,
            rho: 0.2,
        }
    }

    pub fn thresholds(&self) -> Vec<f64> {
        match &self.xi {
            Some(xi) => xi.clone(),
            None => {
                let denom = self.n_bifunctions as f64 + 1.0;
                (1..=self.n_bifunctions).map(|i| i as f64 / denom).collect()
            }
        }
    }

    /// Solver defaults matching this instance: `rho` from the spec.
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            rho: Some(self.rho),
            ..SolverConfig::default()
        }
    }

    fn check(&self) -> Result<Vec<f64>> {
        let xi = self.thresholds();
        if xi.len() != self.n_bifunctions {
            return Err(Error::config(format!(
                "expected {} thresholds, got {}",
                self.n_bifunctions,
                xi.len()
            )));
        }
        if xi.iter().any(|&t| !(t > 0.0 && t < 1.0)) || xi.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::config("thresholds must satisfy 0 < xi_1 < ... < xi_N < 1"));
        }
        if !(0.0..=1.0).contains(&self.start) {
            return Err(Error::config(format!("start {} lies outside [0, 1]", self.start)));
        }
        Ok(xi)
    }
}

/// `B(x) = exp(x − ξ) + sin(x − ξ) − 1` above the threshold, zero below.
pub fn threshold_rate(xi: f64, x: f64) -> f64 {
    if x <= xi {
        0.0
    } else {
        (x - xi).exp() + (x - xi).sin() - 1.0
    }
}

/// `f(x, y) = B(x)(y − x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdBifunction {
    pub xi: f64,
}

impl Bifunction for ThresholdBifunction {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, x: &Point, y: &Point) -> f64 {
        threshold_rate(self.xi, x[0]) * (y[0] - x[0])
    }

    fn subgrad2(&self, x: &Point, _y: &Point) -> Option<Point> {
        Some(Point::scalar(threshold_rate(self.xi, x[0])))
    }

    /// `f(param, ·)` is linear, so the subproblem is a projection of
    /// `anchor − rho B(param)`.
    fn prox(&self, param: &Point, anchor: &Point, rho: f64, set: &FeasibleSet) -> Option<Point> {
        let v = anchor[0] - rho * threshold_rate(self.xi, param[0]);
        Some(match set.as_interval() {
            Some((lo, hi)) => Point::scalar(v.clamp(lo, hi)),
            None => set.project(&Point::scalar(v)),
        })
    }

    fn has_subgradient(&self) -> bool {
        true
    }

    fn has_closed_form(&self) -> bool {
        true
    }

    fn lipschitz(&self) -> (f64, f64) {
        (PAPER_1D_LIPSCHITZ, PAPER_1D_LIPSCHITZ)
    }
}

/// `S_j x = x^j sin^{j−1}(x) / (2j − 1)` for `j ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSineMap {
    pub j: u32,
}

impl PowerSineMap {
    pub fn value(&self, x: f64) -> f64 {
        let j = self.j as i32;
        x.powi(j) * x.sin().powi(j - 1) / (2.0 * self.j as f64 - 1.0)
    }
}

impl NonexpansiveMap for PowerSineMap {
    fn dim(&self) -> usize {
        1
    }

    fn apply(&self, x: &Point) -> Point {
        Point::scalar(self.value(x[0]))
    }
}

/// Builds the instance with `C = [0, 1]` and known solution `P_F(x0)`.
///
/// `F = {0}` as soon as some `S_j` with `j ≥ 2` is present; with at most the
/// identity map, `F = [0, ξ_1]` (or all of `[0, 1]` when `N = 0`).
pub fn make_paper_1d(spec: &Paper1DSpec) -> Result<ProblemInstance> {
    let xi = spec.check()?;
    if spec.n_maps > i32::MAX as usize {
        return Err(Error::config("too many maps"));
    }
    let bifunctions: Vec<Arc<dyn Bifunction>> = xi
        .iter()
        .map(|&xi| Arc::new(ThresholdBifunction { xi }) as Arc<dyn Bifunction>)
        .collect();
    let maps: Vec<Arc<dyn NonexpansiveMap>> = (1..=spec.n_maps as u32)
        .map(|j| Arc::new(PowerSineMap { j }) as Arc<dyn NonexpansiveMap>)
        .collect();
    let upper = if spec.n_maps >= 2 {
        0.0
    } else {
        xi.first().copied().unwrap_or(1.0)
    };
    let known = spec.start.clamp(0.0, upper);
    ProblemInstance::new(
        format!("paper-1d(N={}, M={})", spec.n_bifunctions, spec.n_maps),
        FeasibleSet::interval(0.0, 1.0)?,
        bifunctions,
        maps,
        Point::scalar(spec.start),
    )?
    .with_known_solution(Point::scalar(known))
}
