//! Shipped problem instances.

pub mod affine_vi;
pub mod cournot;
pub mod paper1d;

use std::sync::Arc;

use crate::error::Result;
use crate::oracle::{IdentityMap, ZeroBifunction};
use crate::point::Point;
use crate::problem::ProblemInstance;
use crate::set::FeasibleSet;

pub use affine_vi::{make_affine_vi, random_affine_vi_spec, AffineField, AffineViSpec};
pub use cournot::{interior_equilibrium, make_cournot, prox_separable_quadratic, CournotSpec, Fee};
pub use paper1d::{make_paper_1d, Paper1DSpec, PowerSineMap, ThresholdBifunction};

/// `f ≡ 0` and `S = I` on `[0, 1]^dim`: every feasible point is a solution,
/// so the known solution is the start itself.
pub fn make_zero_problem(dim: usize, start: Point) -> Result<ProblemInstance> {
    let set = FeasibleSet::boxed(vec![0.0; dim], vec![1.0; dim])?;
    ProblemInstance::new(
        format!("zero(d={dim})"),
        set,
        vec![Arc::new(ZeroBifunction { dim })],
        vec![Arc::new(IdentityMap { dim })],
        start.clone(),
    )?
    .with_known_solution(start)
}
