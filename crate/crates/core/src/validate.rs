//! Sampling harness that tries to falsify the oracle contracts of a problem
//! instance: `f(x, x) = 0`, pseudomonotonicity, the Lipschitz-type bound,
//! nonexpansiveness, `S(C) ⊂ C`, and the projection properties of `C`.
//!
//! Every subject (bifunction, map, set) draws from its own ChaCha stream keyed
//! by `(seed, subject index)`, so a report depends only on
//! `(problem, seed, samples)` and never on the worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::parallel::ParallelPlan;
use crate::point::Point;
use crate::problem::ProblemInstance;

/// Relative tolerance of every sampled check.
pub const CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    /// `bifunction[i]`, `map[j]` or `set`.
    pub subject: String,
    pub check: &'static str,
    /// Largest violation observed, normalized by the magnitude of the terms
    /// involved (`excess / (1 + scale)`); zero when no sample violated.
    pub worst_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub problem: String,
    pub samples: usize,
    pub seed: u64,
    pub rho: f64,
    pub rho_bound: f64,
    pub c1: f64,
    pub c2: f64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Running maximum of normalized violations for one check.
struct Worst {
    check: &'static str,
    value: f64,
}

impl Worst {
    fn new(check: &'static str) -> Self {
        Worst { check, value: 0.0 }
    }

    /// Records a violation `excess > 0` of terms with magnitude `scale`.
    /// Non-finite values count as infinite violations.
    fn record(&mut self, excess: f64, scale: f64) {
        let v = if excess.is_finite() && scale.is_finite() {
            excess.max(0.0) / (1.0 + scale.abs())
        } else {
            f64::INFINITY
        };
        if v > self.value {
            self.value = v;
        }
    }

    fn finish(self, subject: &str) -> CheckResult {
        CheckResult {
            subject: subject.to_string(),
            check: self.check,
            worst_violation: self.value,
            tolerance: CHECK_TOL,
            passed: self.value <= CHECK_TOL,
        }
    }
}

/// Samples feasible points uniformly from a bounding box and projects them
/// onto `C`; `wide` draws from the box enlarged by half its width, so that
/// projections are exercised from outside.
struct Sampler<'a> {
    p: &'a ProblemInstance,
    lower: Point,
    upper: Point,
    rng: ChaCha8Rng,
}

impl<'a> Sampler<'a> {
    fn new(p: &'a ProblemInstance, seed: u64, stream: u64) -> Self {
        let (lower, upper) = p
            .sample_box
            .clone()
            .or_else(|| p.set.bounding_box())
            .unwrap_or_else(|| (Point::new(vec![-1.0; p.dim()]), Point::new(vec![1.0; p.dim()])));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Sampler { p, lower, upper, rng }
    }

    fn raw(&mut self, widen: f64) -> Point {
        let coords = self
            .lower
            .iter()
            .zip(self.upper.iter())
            .map(|(&lo, &hi)| {
                let pad = widen * (hi - lo);
                let t: f64 = self.rng.gen();
                (lo - pad) + t * ((hi + pad) - (lo - pad))
            })
            .collect();
        Point::new(coords)
    }

    fn feasible(&mut self) -> Point {
        let x = self.raw(0.0);
        self.p.set.project(&x)
    }

    fn wide(&mut self) -> Point {
        self.raw(0.5)
    }
}

/// Spot-checks every oracle contract of `p` on `samples` draws per check.
///
/// Fails with a configuration error when the step size violates
/// `rho < min(1/(2c1), 1/(2c2))` or the instance is malformed; contract
/// violations are reported, not raised.
pub fn validate_problem(
    p: &ProblemInstance,
    cfg: &SolverConfig,
    samples: usize,
    seed: u64,
) -> Result<ValidationReport> {
    if samples == 0 {
        return Err(Error::config("validation needs at least one sample"));
    }
    p.check()?;
    let rho = cfg.resolve_rho(p)?;
    let (c1, c2) = p.lipschitz();
    let plan = ParallelPlan::new(cfg.workers)?;

    let n_bif = p.n_bifunctions();
    let n_maps = p.n_maps();
    // Subject k: bifunctions first, then maps, then the set.
    let per_subject = plan.map(n_bif + n_maps + 1, |k| {
        let mut s = Sampler::new(p, seed, k as u64);
        if k < n_bif {
            check_bifunction(p, k, samples, &mut s)
        } else if k < n_bif + n_maps {
            check_map(p, k - n_bif, samples, &mut s)
        } else {
            check_set(samples, &mut s)
        }
    });
    let checks: Vec<CheckResult> = per_subject.into_iter().flatten().collect();
    let passed = checks.iter().all(|c| c.passed);
    Ok(ValidationReport {
        problem: p.name.clone(),
        samples,
        seed,
        rho,
        rho_bound: p.rho_bound(),
        c1,
        c2,
        checks,
        passed,
    })
}

fn check_bifunction(p: &ProblemInstance, i: usize, samples: usize, s: &mut Sampler<'_>) -> Vec<CheckResult> {
    let f = p.bifunctions[i].as_ref();
    let (c1, c2) = f.lipschitz();
    let mut diag = Worst::new("diagonal_zero");
    let mut pseudo = Worst::new("pseudomonotone");
    let mut lip = Worst::new("lipschitz_type");
    for _ in 0..samples {
        let (x, y, z) = (s.feasible(), s.feasible(), s.feasible());
        let fxx = f.eval(&x, &x);
        diag.record(fxx.abs(), 0.0);

        let (fxy, fyx) = (f.eval(&x, &y), f.eval(&y, &x));
        if fxy >= 0.0 {
            pseudo.record(fyx, fxy.abs() + fyx.abs());
        } else if !fxy.is_finite() {
            pseudo.record(f64::INFINITY, 0.0);
        }

        let (fyz, fxz) = (f.eval(&y, &z), f.eval(&x, &z));
        let (dxy, dyz) = (c1 * x.dist_sq(&y), c2 * y.dist_sq(&z));
        let slack = fxy + fyz - fxz + dxy + dyz;
        lip.record(-slack, fxy.abs() + fyz.abs() + fxz.abs() + dxy + dyz);
    }
    let subject = format!("bifunction[{i}]");
    vec![diag.finish(&subject), pseudo.finish(&subject), lip.finish(&subject)]
}

fn check_map(p: &ProblemInstance, j: usize, samples: usize, s: &mut Sampler<'_>) -> Vec<CheckResult> {
    let map = p.maps[j].as_ref();
    let mut nonexp = Worst::new("nonexpansive");
    let mut into = Worst::new("maps_into_set");
    for _ in 0..samples {
        let (x, y) = (s.feasible(), s.feasible());
        let (sx, sy) = (map.apply(&x), map.apply(&y));
        let d = x.dist(&y);
        nonexp.record(sx.dist(&sy) - d, d);
        into.record(sx.dist(&p.set.project(&sx)), sx.norm());
    }
    let subject = format!("map[{j}]");
    vec![nonexp.finish(&subject), into.finish(&subject)]
}

fn check_set(samples: usize, s: &mut Sampler<'_>) -> Vec<CheckResult> {
    let set = s.p.set.clone();
    let mut idem = Worst::new("projection_idempotent");
    let mut firm = Worst::new("projection_firmly_nonexpansive");
    let mut var = Worst::new("projection_variational");
    for _ in 0..samples {
        let (x, y) = (s.wide(), s.wide());
        let (px, py) = (set.project(&x), set.project(&y));
        idem.record(set.project(&px).dist(&px), px.norm());

        let d = px.sub(&py);
        let inner = d.dot(&x.sub(&y));
        firm.record(d.norm_sq() - inner, d.norm_sq() + inner.abs());

        let v = s.feasible();
        let lhs = x.sub(&px).dot(&px.sub(&v));
        var.record(-lhs, x.dist(&px) * px.dist(&v));
    }
    vec![idem.finish("set"), firm.finish("set"), var.finish("set")]
}
