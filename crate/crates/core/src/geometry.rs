//! Hybrid cuts and projections onto `C ∩ C_n ∩ Q_n`.
//!
//! The progress cut `C_n` and the anchor cut `Q_n` are halfspaces
//! `{v : ⟨a, v⟩ ≤ b}`. The next iterate is the projection of the start point
//! onto their intersection with `C`, computed analytically where possible and
//! by Dykstra's alternating projections otherwise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point;
use crate::set::FeasibleSet;

/// `{v : ⟨normal, v⟩ ≤ offset}`. A zero normal with a nonnegative offset is the
/// whole space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub normal: Point,
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(normal: impl Into<Point>, offset: f64) -> Self {
        HalfSpace {
            normal: normal.into(),
            offset,
        }
    }

    pub fn whole_space(dim: usize) -> Self {
        HalfSpace {
            normal: Point::zeros(dim),
            offset: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.normal.dim()
    }

    pub fn is_trivial(&self) -> bool {
        self.normal.iter().all(|&a| a == 0.0) && self.offset >= 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !self.normal.is_finite() || self.offset.is_nan() {
            return Err(Error::config("halfspace has non-finite data"));
        }
        if self.normal.iter().all(|&a| a == 0.0) && self.offset < 0.0 {
            return Err(Error::config(format!(
                "halfspace with zero normal and negative offset {} is empty",
                self.offset
            )));
        }
        Ok(())
    }

    /// `⟨a, x⟩ − b`
    pub fn excess(&self, x: &Point) -> f64 {
        self.normal.dot(x) - self.offset
    }

    /// Membership with a tolerance measured as Euclidean distance.
    pub fn contains(&self, x: &Point, tol: f64) -> bool {
        let excess = self.excess(x);
        excess <= 0.0 || excess <= tol * self.normal.norm()
    }

    pub fn distance(&self, x: &Point) -> f64 {
        let excess = self.excess(x);
        if excess <= 0.0 {
            0.0
        } else {
            excess / self.normal.norm()
        }
    }

    fn project_unchecked(&self, x: &Point) -> Point {
        let excess = self.excess(x);
        if excess <= 0.0 {
            x.clone()
        } else {
            x.axpy(-excess / self.normal.norm_sq(), &self.normal)
        }
    }
}

/// `C_n` of the Mann and averaged variants: `{v : ‖ū − v‖ ≤ ‖x_n − v‖}`,
/// written as `⟨2(x_n − ū), v⟩ ≤ ‖x_n‖² − ‖ū‖²`.
///
/// The offset is evaluated as `⟨x_n − ū, x_n + ū⟩`: near convergence
/// `‖x_n‖² − ‖ū‖²` cancels catastrophically and the rounding error, divided
/// by the short normal, would displace the cut by far more than `‖x_n − ū‖`.
pub fn mann_cut(x_n: &Point, u_bar: &Point) -> HalfSpace {
    if x_n == u_bar {
        return HalfSpace::whole_space(x_n.dim());
    }
    let diff = x_n.sub(u_bar);
    let sum = x_n.combine(1.0, u_bar, 1.0);
    HalfSpace {
        offset: diff.dot(&sum),
        normal: diff.scale(2.0),
    }
}

/// `C_n` of the Halpern variant:
/// `{v : ‖ū − v‖² ≤ α‖x0 − v‖² + (1 − α)‖x_n − v‖²}`. The quadratic terms
/// cancel, leaving
/// `⟨2(α x0 + (1 − α) x_n − ū), v⟩ ≤ α‖x0‖² + (1 − α)‖x_n‖² − ‖ū‖²`.
pub fn halpern_cut(x0: &Point, x_n: &Point, u_bar: &Point, alpha: f64) -> Result<HalfSpace> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::config(format!("halpern cut needs alpha in [0, 1), got {alpha}")));
    }
    let blend = x0.combine(alpha, x_n, 1.0 - alpha);
    let normal = blend.combine(2.0, u_bar, -2.0);
    if normal.iter().all(|&a| a == 0.0) {
        // offset is α(1 − α)‖x0 − x_n‖² ≥ 0 in exact arithmetic
        return Ok(HalfSpace::whole_space(x_n.dim()));
    }
    // α‖x0‖² + (1 − α)‖x_n‖² = ‖w‖² + α(1 − α)‖x0 − x_n‖² with w the blend,
    // so the offset is ⟨w − ū, w + ū⟩ + α(1 − α)‖x0 − x_n‖², free of the
    // cancellation the expanded form suffers when ū ≈ w.
    let diff = blend.sub(u_bar);
    let sum = blend.combine(1.0, u_bar, 1.0);
    let offset = diff.dot(&sum) + alpha * (1.0 - alpha) * x0.dist_sq(x_n);
    Ok(HalfSpace { normal, offset })
}

/// `Q_n = {v : ⟨x0 − x_n, v − x_n⟩ ≤ 0}`.
pub fn anchor_cut(x0: &Point, x_n: &Point) -> HalfSpace {
    if x0 == x_n {
        return HalfSpace::whole_space(x_n.dim());
    }
    let normal = x0.sub(x_n);
    let offset = normal.dot(x_n);
    HalfSpace { normal, offset }
}

pub fn project_halfspace(h: &HalfSpace, x: &Point) -> Result<Point> {
    h.validate()?;
    if h.dim() != x.dim() {
        return Err(Error::config("halfspace and point dimensions differ"));
    }
    Ok(h.project_unchecked(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionBudget {
    pub max_sweeps: usize,
    pub tol: f64,
}

impl Default for ProjectionBudget {
    fn default() -> Self {
        ProjectionBudget {
            max_sweeps: 10_000,
            tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMethod {
    /// Closed form over at most two halfspaces (possibly confirmed inside `C`).
    Analytic,
    /// Interval intersection in R^1.
    Interval,
    /// Dual root finding over a box and at most two halfspaces.
    BoxDual,
    Dykstra,
}

#[derive(Debug, Clone)]
pub struct Projection {
    pub point: Point,
    pub method: ProjectionMethod,
    pub sweeps: usize,
    /// Largest distance from `point` to any of the intersected sets.
    pub residual: f64,
    /// False when Dykstra exhausted its sweep budget; `point` is then the
    /// best iterate.
    pub converged: bool,
}

impl Projection {
    fn exact(point: Point, method: ProjectionMethod) -> Self {
        Projection {
            point,
            method,
            sweeps: 0,
            residual: 0.0,
            converged: true,
        }
    }
}

/// A Dykstra run whose best residual stays above `PLATEAU_FLOOR` without
/// improving for `PLATEAU_WINDOW` sweeps is declared infeasible.
const PLATEAU_FLOOR: f64 = 1e-6;
const PLATEAU_WINDOW: usize = 1000;

/// Projects `x0` onto `C ∩ (∩ cuts)`.
pub fn project_intersection(
    set: &FeasibleSet,
    cuts: &[HalfSpace],
    x0: &Point,
    budget: &ProjectionBudget,
) -> Result<Projection> {
    let dim = set.dim();
    if x0.dim() != dim {
        return Err(Error::config("start point and feasible set dimensions differ"));
    }
    let mut active: Vec<&HalfSpace> = Vec::with_capacity(cuts.len());
    for h in cuts {
        if h.dim() != dim {
            return Err(Error::config("cut and feasible set dimensions differ"));
        }
        h.validate()?;
        if !h.is_trivial() {
            active.push(h);
        }
    }

    let whole = FeasibleSet::WholeSpace { dim };
    let base = match set {
        FeasibleSet::HalfSpaces { cuts: own, .. } => {
            active.extend(own.iter().filter(|h| !h.is_trivial()));
            &whole
        }
        other => other,
    };

    if active.is_empty() {
        return Ok(Projection::exact(base.project(x0), ProjectionMethod::Analytic));
    }

    if let Some((lo, hi)) = base.as_interval() {
        return project_interval(lo, hi, &active, x0);
    }

    if active.len() <= 2 {
        let candidate = project_two(&active, x0)?;
        if matches!(base, FeasibleSet::WholeSpace { .. }) || base.contains(&candidate, 0.0) {
            return Ok(Projection::exact(candidate, ProjectionMethod::Analytic));
        }
        if let FeasibleSet::Box { lower, upper } = base {
            let point = project_box_cuts(lower, upper, &active, x0)?;
            return Ok(Projection::exact(point, ProjectionMethod::BoxDual));
        }
    }

    dykstra(base, &active, x0, budget)
}

fn project_interval(mut lo: f64, mut hi: f64, cuts: &[&HalfSpace], x0: &Point) -> Result<Projection> {
    for h in cuts {
        let a = h.normal[0];
        let bound = h.offset / a;
        if a > 0.0 {
            hi = hi.min(bound);
        } else {
            lo = lo.max(bound);
        }
    }
    let scale = 1.0_f64.max(lo.abs()).max(hi.abs());
    if lo > hi + 1e-12 * scale {
        return Err(Error::Infeasible(format!("empty interval [{lo}, {hi}]")));
    }
    let v = x0[0].max(lo).min(hi);
    Ok(Projection::exact(Point::scalar(v), ProjectionMethod::Interval))
}

/// Exact projection onto the intersection of one or two halfspaces.
fn project_two(cuts: &[&HalfSpace], x0: &Point) -> Result<Point> {
    let tol = 1e-13 * x0.norm().max(1.0);
    if cuts.iter().all(|h| h.contains(x0, 0.0)) {
        return Ok(x0.clone());
    }
    for (i, h) in cuts.iter().enumerate() {
        if h.contains(x0, 0.0) {
            continue;
        }
        let p = h.project_unchecked(x0);
        if cuts
            .iter()
            .enumerate()
            .all(|(k, other)| k == i || other.contains(&p, tol))
        {
            return Ok(p);
        }
    }
    // Both constraints active: project onto the affine piece
    // {⟨a1, v⟩ = b1, ⟨a2, v⟩ = b2} through the 2×2 Gram system.
    let (h1, h2) = (cuts[0], cuts[1]);
    let g11 = h1.normal.norm_sq();
    let g22 = h2.normal.norm_sq();
    let g12 = h1.normal.dot(&h2.normal);
    let det = g11 * g22 - g12 * g12;
    if det <= 1e-14 * g11 * g22 {
        return Err(Error::Infeasible("parallel cuts with disjoint halfspaces".into()));
    }
    let r1 = h1.excess(x0);
    let r2 = h2.excess(x0);
    let l1 = (g22 * r1 - g12 * r2) / det;
    let l2 = (g11 * r2 - g12 * r1) / det;
    Ok(x0.axpy(-l1, &h1.normal).axpy(-l2, &h2.normal))
}

/// Exact projection onto `[lower, upper] ∩ {⟨a_k, v⟩ ≤ b_k}` for one or two
/// halfspaces.
///
/// The minimizer is `clamp(x0 − Σ λ_k a_k)` for the optimal multipliers
/// `λ ≥ 0`. With one cut the slack `⟨a, clamp(x0 − λa)⟩ − b` is
/// nonincreasing and piecewise linear in `λ`, so its root is located among
/// the breakpoints and solved linearly within its segment. With two cuts the
/// first multiplier is solved that way for each `λ_2`, and the second cut's
/// slack, again nonincreasing in `λ_2`, is bisected.
fn project_box_cuts(lower: &Point, upper: &Point, cuts: &[&HalfSpace], x0: &Point) -> Result<Point> {
    let clamp = |v: Point| {
        Point::new(
            v.iter()
                .zip(lower.iter().zip(upper.iter()))
                .map(|(&x, (&lo, &hi))| x.max(lo).min(hi))
                .collect(),
        )
    };
    match cuts {
        [h] => box_cut_multiplier(lower, upper, h, x0).map(|l| clamp(x0.axpy(-l, &h.normal))),
        [h1, h2] => {
            // Rejects an empty first cut up front, independently of λ_2.
            box_cut_multiplier(lower, upper, h1, x0)?;
            let point_at = |l2: f64| -> Result<Point> {
                let shifted = x0.axpy(-l2, &h2.normal);
                let l1 = box_cut_multiplier(lower, upper, h1, &shifted)?;
                Ok(clamp(shifted.axpy(-l1, &h1.normal)))
            };
            let at_zero = point_at(0.0)?;
            if h2.excess(&at_zero) <= 0.0 {
                return Ok(at_zero);
            }
            let mut lo = 0.0;
            let mut hi = 1.0 / h2.normal.norm_sq();
            let mut point = point_at(hi)?;
            while h2.excess(&point) > 0.0 {
                lo = hi;
                hi *= 2.0;
                if !hi.is_finite() {
                    return Err(Error::Infeasible("box and cuts have an empty intersection".into()));
                }
                point = point_at(hi)?;
            }
            // Bisect until the bracket stops shrinking; `hi` stays feasible.
            loop {
                let mid = lo + 0.5 * (hi - lo);
                if mid <= lo || mid >= hi {
                    break;
                }
                let candidate = point_at(mid)?;
                if h2.excess(&candidate) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                    point = candidate;
                }
            }
            Ok(point)
        }
        _ => Err(Error::config("box projection handles one or two cuts")),
    }
}

/// Optimal multiplier `λ ≥ 0` of one halfspace over a box, or an
/// infeasibility error when the halfspace misses the box.
fn box_cut_multiplier(lower: &Point, upper: &Point, h: &HalfSpace, x0: &Point) -> Result<f64> {
    let a = &h.normal;
    let slack = |l: f64| -> f64 {
        let mut s = -h.offset;
        for i in 0..a.dim() {
            s += a[i] * (x0[i] - l * a[i]).max(lower[i]).min(upper[i]);
        }
        s
    };
    if slack(0.0) <= 0.0 {
        return Ok(0.0);
    }
    // Each coordinate moves freely between the multipliers at which it
    // reaches its two bounds.
    let mut breaks: Vec<f64> = vec![0.0];
    for i in 0..a.dim() {
        if a[i] != 0.0 {
            for bound in [lower[i], upper[i]] {
                let t = (x0[i] - bound) / a[i];
                if t > 0.0 && t.is_finite() {
                    breaks.push(t);
                }
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    // Last breakpoint with positive slack (the first one has it).
    let k = breaks.partition_point(|&t| slack(t) > 0.0) - 1;
    let start = breaks[k];
    let next = breaks.get(k + 1).copied();
    let probe = next.map_or(start + start.max(1.0), |t| start + 0.5 * (t - start));
    let rate: f64 = (0..a.dim())
        .filter(|&i| {
            let v = x0[i] - probe * a[i];
            a[i] != 0.0 && v > lower[i] && v < upper[i]
        })
        .map(|i| a[i] * a[i])
        .sum();
    if rate > 0.0 {
        let l = start + slack(start) / rate;
        return Ok(next.map_or(l, |t| l.min(t)));
    }
    // The slack is flat past the last breakpoint only if the box keeps the
    // halfspace out; a flat interior segment is rounding, resolved at its end.
    next.ok_or_else(|| Error::Infeasible(format!("halfspace misses the box by {:e}", slack(start) / a.norm())))
}

enum Component<'a> {
    Set(&'a FeasibleSet),
    Cut(&'a HalfSpace),
}

impl Component<'_> {
    fn project(&self, x: &Point) -> Point {
        match self {
            Component::Set(s) => s.project(x),
            Component::Cut(h) => h.project_unchecked(x),
        }
    }

    fn distance(&self, x: &Point) -> f64 {
        match self {
            Component::Set(s) => x.dist(&s.project(x)),
            Component::Cut(h) => h.distance(x),
        }
    }
}

fn dykstra(set: &FeasibleSet, cuts: &[&HalfSpace], x0: &Point, budget: &ProjectionBudget) -> Result<Projection> {
    let mut parts: Vec<Component<'_>> = Vec::with_capacity(cuts.len() + 1);
    if !matches!(set, FeasibleSet::WholeSpace { .. }) {
        parts.push(Component::Set(set));
    }
    parts.extend(cuts.iter().map(|h| Component::Cut(h)));

    let tol = budget.tol * x0.norm().max(1.0);
    let mut x = x0.clone();
    let mut increments = vec![Point::zeros(x0.dim()); parts.len()];
    let mut residual = f64::INFINITY;
    let (mut best, mut best_sweep) = (f64::INFINITY, 0);

    for sweep in 1..=budget.max_sweeps {
        let before = x.clone();
        // A sweep can return x unchanged while the increments still move, in
        // which case the next sweep moves x again; both must settle.
        let mut increment_change: f64 = 0.0;
        for (part, inc) in parts.iter().zip(increments.iter_mut()) {
            let shifted = x.add(inc);
            let y = part.project(&shifted);
            let next = shifted.sub(&y);
            increment_change = increment_change.max(next.dist(inc));
            *inc = next;
            x = y;
        }
        let change = x.dist(&before);
        residual = parts.iter().map(|p| p.distance(&x)).fold(0.0, f64::max);
        if change <= tol && increment_change <= tol && residual <= tol {
            return Ok(Projection {
                point: x,
                method: ProjectionMethod::Dykstra,
                sweeps: sweep,
                residual,
                converged: true,
            });
        }
        // Dykstra's residual is not monotone, so only the best residual seen
        // so far is a meaningful progress measure.
        if residual < best * (1.0 - 1e-6) {
            best = residual;
            best_sweep = sweep;
        } else if best > PLATEAU_FLOOR && sweep - best_sweep >= PLATEAU_WINDOW {
            return Err(Error::Infeasible(format!(
                "alternating projections stalled at residual {best:e} after {sweep} sweeps"
            )));
        }
    }
    Ok(Projection {
        point: x,
        method: ProjectionMethod::Dykstra,
        sweeps: budget.max_sweeps,
        residual,
        converged: false,
    })
}
