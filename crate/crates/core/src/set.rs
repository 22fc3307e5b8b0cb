//! The constraint set `C` as projection and membership oracles.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{self, HalfSpace, ProjectionBudget};
use crate::point::Point;

/// User-supplied closed convex set.
pub trait ConvexSet: Send + Sync {
    fn dim(&self) -> usize;
    fn project(&self, x: &Point) -> Point;
    fn contains(&self, x: &Point, tol: f64) -> bool;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SetKind {
    WholeSpace,
    Box,
    Ball,
    HalfspaceList,
    Custom,
}

#[derive(Clone)]
pub enum FeasibleSet {
    WholeSpace {
        dim: usize,
    },
    /// Coordinatewise bounds; infinite bounds are allowed.
    Box {
        lower: Point,
        upper: Point,
    },
    Ball {
        center: Point,
        radius: f64,
    },
    HalfSpaces {
        dim: usize,
        cuts: Vec<HalfSpace>,
    },
    /// A custom set must carry a bounding box for sampling.
    Custom {
        set: Arc<dyn ConvexSet>,
        lower: Point,
        upper: Point,
    },
}

impl FeasibleSet {
    pub fn whole_space(dim: usize) -> Self {
        FeasibleSet::WholeSpace { dim }
    }

    pub fn boxed(lower: impl Into<Point>, upper: impl Into<Point>) -> Result<Self> {
        let (lower, upper) = (lower.into(), upper.into());
        if lower.dim() != upper.dim() || lower.dim() == 0 {
            return Err(Error::config("box bounds must be nonempty and of equal dimension"));
        }
        if lower
            .iter()
            .zip(upper.iter())
            .any(|(l, u)| l.is_nan() || u.is_nan() || l > u)
        {
            return Err(Error::config("box requires lower <= upper in every coordinate"));
        }
        Ok(FeasibleSet::Box { lower, upper })
    }

    /// The interval `[lo, hi]` in R^1.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::boxed(vec![lo], vec![hi])
    }

    pub fn ball(center: impl Into<Point>, radius: f64) -> Result<Self> {
        let center = center.into();
        if !(radius >= 0.0 && radius.is_finite()) || !center.is_finite() {
            return Err(Error::config("ball requires a finite center and radius >= 0"));
        }
        Ok(FeasibleSet::Ball { center, radius })
    }

    pub fn halfspaces(dim: usize, cuts: Vec<HalfSpace>) -> Result<Self> {
        for h in &cuts {
            if h.dim() != dim {
                return Err(Error::config("halfspace dimension mismatch"));
            }
            h.validate()?;
        }
        Ok(FeasibleSet::HalfSpaces { dim, cuts })
    }

    pub fn custom(set: Arc<dyn ConvexSet>, lower: Point, upper: Point) -> Result<Self> {
        if lower.dim() != set.dim() || upper.dim() != set.dim() {
            return Err(Error::config("custom set bounding box has the wrong dimension"));
        }
        Ok(FeasibleSet::Custom { set, lower, upper })
    }

    pub fn kind(&self) -> SetKind {
        match self {
            FeasibleSet::WholeSpace { .. } => SetKind::WholeSpace,
            FeasibleSet::Box { .. } => SetKind::Box,
            FeasibleSet::Ball { .. } => SetKind::Ball,
            FeasibleSet::HalfSpaces { .. } => SetKind::HalfspaceList,
            FeasibleSet::Custom { .. } => SetKind::Custom,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::WholeSpace { dim } | FeasibleSet::HalfSpaces { dim, .. } => *dim,
            FeasibleSet::Box { lower, .. } => lower.dim(),
            FeasibleSet::Ball { center, .. } => center.dim(),
            FeasibleSet::Custom { set, .. } => set.dim(),
        }
    }

    /// Metric projection `P_C`.
    pub fn project(&self, x: &Point) -> Point {
        match self {
            FeasibleSet::WholeSpace { .. } => x.clone(),
            FeasibleSet::Box { lower, upper } => Point::new(
                x.iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .map(|(&v, (&lo, &hi))| v.max(lo).min(hi))
                    .collect(),
            ),
            FeasibleSet::Ball { center, radius } => {
                let d = x.dist(center);
                if d <= *radius {
                    x.clone()
                } else {
                    center.axpy(radius / d, &x.sub(center))
                }
            }
            FeasibleSet::HalfSpaces { dim, cuts } => {
                let whole = FeasibleSet::WholeSpace { dim: *dim };
                // Best iterate is acceptable here; infeasible lists are a caller bug.
                match geometry::project_intersection(&whole, cuts, x, &ProjectionBudget::default()) {
                    Ok(p) => p.point,
                    Err(_) => x.clone(),
                }
            }
            FeasibleSet::Custom { set, .. } => set.project(x),
        }
    }

    pub fn contains(&self, x: &Point, tol: f64) -> bool {
        match self {
            FeasibleSet::WholeSpace { .. } => true,
            FeasibleSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .all(|(&v, (&lo, &hi))| v >= lo - tol && v <= hi + tol),
            FeasibleSet::Ball { center, radius } => x.dist(center) <= radius + tol,
            FeasibleSet::HalfSpaces { cuts, .. } => cuts.iter().all(|h| h.contains(x, tol)),
            FeasibleSet::Custom { set, .. } => set.contains(x, tol),
        }
    }

    /// Analytic bounding box, if the set kind provides one.
    pub fn bounding_box(&self) -> Option<(Point, Point)> {
        match self {
            FeasibleSet::Box { lower, upper } => {
                if lower.is_finite() && upper.is_finite() {
                    Some((lower.clone(), upper.clone()))
                } else {
                    None
                }
            }
            FeasibleSet::Ball { center, radius } => Some((center.map(|c| c - radius), center.map(|c| c + radius))),
            FeasibleSet::Custom { lower, upper, .. } => Some((lower.clone(), upper.clone())),
            FeasibleSet::WholeSpace { .. } | FeasibleSet::HalfSpaces { .. } => None,
        }
    }

    /// Endpoints when the set is an interval of R^1.
    pub(crate) fn as_interval(&self) -> Option<(f64, f64)> {
        match self {
            FeasibleSet::WholeSpace { dim: 1 } => Some((f64::NEG_INFINITY, f64::INFINITY)),
            FeasibleSet::Box { lower, upper } if lower.dim() == 1 => Some((lower[0], upper[0])),
            FeasibleSet::Ball { center, radius } if center.dim() == 1 => Some((center[0] - radius, center[0] + radius)),
            _ => None,
        }
    }
}

impl fmt::Debug for FeasibleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeasibleSet::WholeSpace { dim } => write!(f, "WholeSpace(R^{dim})"),
            FeasibleSet::Box { lower, upper } => write!(f, "Box({lower:?}, {upper:?})"),
            FeasibleSet::Ball { center, radius } => write!(f, "Ball({center:?}, {radius})"),
            FeasibleSet::HalfSpaces { cuts, .. } => write!(f, "HalfSpaces({} cuts)", cuts.len()),
            FeasibleSet::Custom { .. } => write!(f, "Custom"),
        }
    }
}
