//! Independent reference implementations shared by the test suites.
#![allow(dead_code)]

use equihybrid::solvers::{solve_observed, Algorithm, IterationView, StopReason};
use equihybrid::{Point, ProblemInstance, SolverConfig, VariationalFamily};
use nalgebra::DMatrix;

/// `B(ξ, x)` of the one-dimensional family: zero up to the threshold, then
/// `e^{x−ξ} + sin(x − ξ) − 1`.
pub fn threshold_rate(xi: f64, x: f64) -> f64 {
    if x <= xi {
        0.0
    } else {
        (x - xi).exp() + (x - xi).sin() - 1.0
    }
}

// One-dimensional family.

pub fn s_map(j: usize, x: f64) -> f64 {
    x.powi(j as i32) * x.sin().powi(j as i32 - 1) / (2.0 * j as f64 - 1.0)
}

/// Index of the farthest value from `x`, smallest index on ties.
pub fn farthest(values: &[f64], x: f64) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if (v - x).abs() > (values[best] - x).abs() {
            best = i;
        }
    }
    best
}

/// Scalar extragradient stage: `z̄` for thresholds `xi`.
pub fn z_bar(xi: &[f64], x: f64, rho: f64) -> f64 {
    let z: Vec<f64> = xi
        .iter()
        .map(|&t| {
            let y = (x - rho * threshold_rate(t, x)).clamp(0.0, 1.0);
            (x - rho * threshold_rate(t, y)).clamp(0.0, 1.0)
        })
        .collect();
    if z.is_empty() {
        x
    } else {
        z[farthest(&z, x)]
    }
}

pub fn thresholds(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / (n as f64 + 1.0)).collect()
}

/// The closed-form recursion `x_{n+1} = (x_n + ū_n)/2` with `α = 1/(n+2)`.
pub fn mann_reference(n: usize, m: usize, rho: f64, iters: usize) -> Vec<f64> {
    let xi = thresholds(n);
    let mut x = 1.0_f64;
    let mut out = Vec::new();
    for k in 0..iters {
        let alpha = 1.0 / (k as f64 + 2.0);
        let zb = z_bar(&xi, x, rho);
        let u: Vec<f64> = (1..=m).map(|j| alpha * x + (1.0 - alpha) * s_map(j, zb)).collect();
        let ub = if u.is_empty() { zb } else { u[farthest(&u, x)] };
        x = (x + ub) / 2.0;
        out.push(x);
    }
    out
}

/// Algorithm 2 in one dimension: both cuts are half-lines, so the new
/// iterate is `x0 = 1` clamped to their intersection with `[0, 1]`.
pub fn halpern_reference(n: usize, m: usize, rho: f64, alpha: impl Fn(usize) -> f64, iters: usize) -> Vec<f64> {
    let xi = thresholds(n);
    let x0 = 1.0_f64;
    let mut x = x0;
    let mut out = Vec::new();
    for k in 0..iters {
        let a = alpha(k);
        let zb = z_bar(&xi, x, rho);
        let u: Vec<f64> = (1..=m).map(|j| a * x0 + (1.0 - a) * s_map(j, zb)).collect();
        let ub = u[farthest(&u, x)];
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let mut cut = |normal: f64, offset: f64| {
            if normal > 0.0 {
                hi = hi.min(offset / normal);
            } else if normal < 0.0 {
                lo = lo.max(offset / normal);
            }
        };
        let w = a * x0 + (1.0 - a) * x;
        cut(2.0 * (w - ub), a * x0 * x0 + (1.0 - a) * x * x - ub * ub);
        cut(x0 - x, (x0 - x) * x);
        x = x0.clamp(lo, hi);
        out.push(x);
    }
    out
}

// Variational inequalities.

/// Exact projection of `x0` onto `{v : a_k · v ≤ b_k}` by enumerating active
/// sets of size at most `d` and keeping the closest feasible candidate.
pub fn project_polyhedron(rows: &[(Vec<f64>, f64)], x0: &[f64]) -> Vec<f64> {
    let d = x0.len();
    let feasible = |v: &[f64]| {
        rows.iter()
            .all(|(a, b)| a.iter().zip(v).map(|(p, q)| p * q).sum::<f64>() <= b + 1e-12)
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |v: Vec<f64>| {
        if feasible(&v) {
            let dist: f64 = v.iter().zip(x0).map(|(p, q)| (p - q) * (p - q)).sum();
            if best.as_ref().is_none_or(|(bd, _)| dist < *bd) {
                best = Some((dist, v));
            }
        }
    };
    consider(x0.to_vec());
    let m = rows.len();
    let mut subsets: Vec<Vec<usize>> = (0..m).map(|i| vec![i]).collect();
    let mut frontier = subsets.clone();
    for _ in 1..d {
        let mut next = Vec::new();
        for s in &frontier {
            for j in s.last().unwrap() + 1..m {
                let mut t = s.clone();
                t.push(j);
                next.push(t);
            }
        }
        subsets.extend(next.iter().cloned());
        frontier = next;
    }
    for s in subsets {
        // v = x0 − Aᵀλ with A v = b on the active rows.
        let k = s.len();
        let a = DMatrix::from_fn(k, d, |r, c| rows[s[r]].0[c]);
        let x = nalgebra::DVector::from_column_slice(x0);
        let rhs = &a * &x - nalgebra::DVector::from_fn(k, |r, _| rows[s[r]].1);
        let gram = &a * a.transpose();
        if gram.determinant().abs() < 1e-14 {
            continue;
        }
        let Some(lambda) = gram.lu().solve(&rhs) else { continue };
        let v = x - a.transpose() * lambda;
        consider(v.iter().copied().collect());
    }
    best.expect("polyhedron is nonempty").1
}

/// One step of the hybrid extragradient iteration for one field, coded
/// directly: `y = P_C(x − ρAx)`, `z = P_C(x − ρAy)`,
/// `x⁺ = P_{C ∩ {‖z − v‖ ≤ ‖x − v‖} ∩ {⟨x0 − x, v − x⟩ ≤ 0}}(x0)`.
pub fn hybrid_extragradient_step(
    fam: &VariationalFamily,
    lower: &[f64],
    upper: &[f64],
    rho: f64,
    x: &[f64],
) -> Vec<f64> {
    let a = &fam.fields[0];
    let d = lower.len();
    let clamp = |v: Vec<f64>| -> Vec<f64> { v.iter().enumerate().map(|(k, x)| x.clamp(lower[k], upper[k])).collect() };
    let x0: Vec<f64> = fam.start.to_vec();
    let ax = a.apply(&Point::new(x.to_vec()));
    let y = clamp((0..d).map(|k| x[k] - rho * ax[k]).collect());
    let ay = a.apply(&Point::new(y));
    let z = clamp((0..d).map(|k| x[k] - rho * ay[k]).collect());
    let mut rows = Vec::new();
    for k in 0..d {
        let mut e = vec![0.0; d];
        e[k] = 1.0;
        rows.push((e.clone(), upper[k]));
        e[k] = -1.0;
        rows.push((e, -lower[k]));
    }
    // ‖z − v‖² ≤ ‖x − v‖²  ⇔  2(x − z)·v ≤ (x − z)·(x + z)
    if x != z.as_slice() {
        let offset: f64 = (0..d).map(|k| (x[k] - z[k]) * (x[k] + z[k])).sum();
        rows.push(((0..d).map(|k| 2.0 * (x[k] - z[k])).collect(), offset));
    }
    let g: Vec<f64> = (0..d).map(|k| x0[k] - x[k]).collect();
    if g.iter().any(|v| *v != 0.0) {
        rows.push((g.clone(), g.iter().zip(x).map(|(p, q)| p * q).sum()));
    }
    project_polyhedron(&rows, &x0)
}

/// Brute-force projection: the point of the grid `lo + k·step` on `[lo, hi]^d`
/// (`d` = 1 or 2) nearest to `x0` among those with `feasible` true.
pub fn grid_projection(lo: f64, hi: f64, step: f64, x0: &[f64], feasible: impl Fn(&[f64]) -> bool) -> Option<Vec<f64>> {
    let count = ((hi - lo) / step).round() as usize + 1;
    let coord = |k: usize| lo + k as f64 * step;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |v: Vec<f64>| {
        if feasible(&v) {
            let d: f64 = v.iter().zip(x0).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, v));
            }
        }
    };
    match x0.len() {
        1 => (0..count).for_each(|i| consider(vec![coord(i)])),
        2 => {
            for i in 0..count {
                for j in 0..count {
                    consider(vec![coord(i), coord(j)]);
                }
            }
        }
        d => panic!("grid oracle supports R^1 and R^2, got R^{d}"),
    }
    best.map(|(_, v)| v)
}

/// Exact projection onto `{v in [lo, hi]^d : a_k . v <= b_k}` in R^1 or R^2
/// by enumerating every candidate active set (none, one constraint, or a
/// vertex of two) and keeping the nearest feasible candidate.
pub fn active_set_projection(lo: f64, hi: f64, x0: &[f64], cuts: &[(Vec<f64>, f64)]) -> Option<Vec<f64>> {
    let d = x0.len();
    assert!(d == 1 || d == 2, "active-set oracle supports R^1 and R^2, got R^{d}");
    let mut rows: Vec<(Vec<f64>, f64)> = cuts.to_vec();
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        rows.push((e.clone(), hi));
        e[i] = -1.0;
        rows.push((e, -lo));
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    let feasible = |v: &[f64]| rows.iter().all(|(a, b)| dot(a, v) <= b + 1e-12);
    let mut candidates = vec![x0.to_vec()];
    for (a, b) in &rows {
        let t = (dot(a, x0) - b) / dot(a, a);
        candidates.push(x0.iter().zip(a).map(|(x, ai)| x - t * ai).collect());
    }
    if d == 2 {
        for (i, (a, b)) in rows.iter().enumerate() {
            for (c, e) in &rows[i + 1..] {
                let det = a[0] * c[1] - a[1] * c[0];
                if det.abs() > 1e-14 {
                    candidates.push(vec![(b * c[1] - a[1] * e) / det, (a[0] * e - c[0] * b) / det]);
                }
            }
        }
    }
    candidates
        .into_iter()
        .filter(|v| feasible(v))
        .map(|v| (v.iter().zip(x0).map(|(p, q)| (p - q) * (p - q)).sum::<f64>(), v))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, v)| v)
}

// Per-iteration invariants.

pub const SLACK: f64 = 1e-10;

#[derive(Default, Debug)]
pub struct Violations {
    pub fejer: Vec<(usize, f64)>,
    pub cut: Vec<(usize, f64)>,
    pub anchor: Vec<(usize, f64)>,
    pub contraction: Vec<(usize, f64)>,
    pub self_consistency: Vec<(usize, f64)>,
}

impl Violations {
    pub fn is_empty(&self) -> bool {
        self.fejer.is_empty()
            && self.cut.is_empty()
            && self.anchor.is_empty()
            && self.contraction.is_empty()
            && self.self_consistency.is_empty()
    }
}

pub fn algorithms(p: &ProblemInstance) -> Vec<Algorithm> {
    if p.n_maps() == 0 {
        vec![Algorithm::EquilibriumOnly, Algorithm::Mann]
    } else {
        vec![Algorithm::Mann, Algorithm::Halpern, Algorithm::Averaged]
    }
}

pub fn check_run(p: &ProblemInstance, cfg: &SolverConfig, alg: Algorithm) -> (Violations, StopReason) {
    let x_star = p.known_solution.clone().expect("shipped cases carry a known solution");
    let (c1, c2) = p.lipschitz();
    let mut v = Violations::default();
    let mut observe = |it: &IterationView<'_>| {
        let n = it.n;
        let dx = it.x.dist(&x_star);
        // Fejér-type decrease; the anchored variant only contracts toward the
        // convex combination of x0 and x_n.
        let excess = if alg == Algorithm::Halpern {
            it.u_bar.dist_sq(&x_star) - (it.alpha * it.x0.dist_sq(&x_star) + (1.0 - it.alpha) * dx * dx)
        } else {
            it.u_bar.dist(&x_star) - dx
        };
        if excess > SLACK {
            v.fejer.push((n, excess));
        }
        for cut in [it.progress_cut, it.anchor_cut] {
            if cut.excess(&x_star) > SLACK * (1.0 + cut.normal.norm()) {
                v.cut.push((n, cut.excess(&x_star)));
            }
        }
        let shrink = it.x.dist(it.x0) - it.x_next.dist(it.x0);
        if shrink > SLACK {
            v.anchor.push((n, shrink));
        }
        for (y, z) in it.ys.iter().zip(it.zs) {
            let rhs = dx * dx - (1.0 - 2.0 * it.rho * c1) * y.dist_sq(it.x) - (1.0 - 2.0 * it.rho * c2) * y.dist_sq(z);
            let excess = z.dist_sq(&x_star) - rhs;
            if excess > SLACK {
                v.contraction.push((n, excess));
            }
        }
        if !it.anchor_cut.contains(it.x, 1e-12) {
            v.self_consistency.push((n, it.anchor_cut.excess(it.x)));
        }
        for cut in [it.progress_cut, it.anchor_cut] {
            if cut.excess(it.x_next) > 1e-9 * (1.0 + cut.normal.norm()) {
                v.self_consistency.push((n, cut.excess(it.x_next)));
            }
        }
    };
    let r = solve_observed(p, cfg, alg, &mut observe).unwrap();
    (v, r.stop_reason)
}
