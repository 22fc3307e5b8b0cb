//! Parallel hybrid extragradient solvers for a common element of the
//! solution sets of `N` pseudomonotone equilibrium problems and the
//! fixed-point sets of `M` nonexpansive maps in `R^d`.
//!
//! Each iteration solves the `N` extragradient subproblems in parallel, picks
//! the corrector farthest from the current iterate, applies the `M` maps in
//! parallel, and projects the start point onto two halfspace cuts intersected
//! with the feasible set. The iterates converge to the projection of the
//! start point onto the common solution set.
//!
//! ```
//! use equihybrid::problems::{make_paper_1d, Paper1DSpec};
//! use equihybrid::solvers::{solve_mann, StopReason};
//!
//! let spec = Paper1DSpec::new(4, 3);
//! let problem = make_paper_1d(&spec).unwrap();
//! let result = solve_mann(&problem, &spec.solver_config()).unwrap();
//! assert_eq!(result.stop_reason, StopReason::StepTol);
//! assert!(result.solution[0].abs() < 1e-7);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod geometry;
pub mod oracle;
pub mod parallel;
pub mod point;
pub mod problem;
pub mod problems;
pub mod prox;
pub mod set;
pub mod solvers;
pub mod validate;

pub use config::{AlphaSchedule, SolverConfig, WeightSchedule};
pub use error::{Error, Result};
pub use geometry::{HalfSpace, ProjectionBudget};
pub use oracle::{Bifunction, NonexpansiveMap, VectorField};
pub use parallel::ParallelPlan;
pub use point::Point;
pub use problem::{ProblemInstance, VariationalFamily};
pub use prox::InnerBudget;
pub use set::FeasibleSet;
pub use solvers::{Algorithm, SolveResult, StopReason, TraceRecord};
pub use validate::{validate_problem, ValidationReport};
