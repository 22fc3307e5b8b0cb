//! Shipped problems with a known solution, shared by the integration tests.
#![allow(dead_code)]

pub mod oracles;

use equihybrid::problems::{
    interior_equilibrium, make_affine_vi, make_cournot, make_paper_1d, make_zero_problem, random_affine_vi_spec,
    CournotSpec, Fee, Paper1DSpec,
};
use equihybrid::{AlphaSchedule, Point, ProblemInstance, SolverConfig};

pub struct Case {
    pub label: &'static str,
    pub problem: ProblemInstance,
    pub cfg: SolverConfig,
}

pub fn cournot_with_quadratic_fee() -> CournotSpec {
    let mut spec = CournotSpec::symmetric(2, 10.0, 1.0, 10.0);
    let x = interior_equilibrium(&spec).unwrap();
    spec.fees = (0..2).map(|j| Fee::centered(0.5, x[j])).collect();
    spec
}

/// Every shipped problem family with a known solution, with the step size
/// each is usually run at.
pub fn shipped_cases() -> Vec<Case> {
    let p1d = |n, m| {
        let spec = Paper1DSpec::new(n, m);
        let cfg = SolverConfig {
            max_iter: 400,
            ..spec.solver_config()
        };
        make_paper_1d(&spec).map(|problem| (problem, cfg)).unwrap()
    };
    let mut cases = Vec::new();
    for (label, (n, m)) in [
        ("paper-1d 5x4", (5, 4)),
        ("paper-1d 1x1", (1, 1)),
        ("paper-1d 3x0", (3, 0)),
    ] {
        let (problem, cfg) = p1d(n, m);
        cases.push(Case { label, problem, cfg });
    }
    let plain = SolverConfig {
        max_iter: 400,
        ..SolverConfig::default()
    };
    cases.push(Case {
        label: "cournot duopoly",
        problem: make_cournot(&CournotSpec::symmetric(2, 10.0, 1.0, 10.0)).unwrap(),
        cfg: plain.clone(),
    });
    cases.push(Case {
        label: "cournot fee",
        problem: make_cournot(&cournot_with_quadratic_fee()).unwrap(),
        cfg: plain.clone(),
    });
    let mut three = CournotSpec::symmetric(3, 12.0, 0.8, 10.0);
    three.tax_quadratic = vec![0.5, 0.2, 0.0];
    three.tax_linear = vec![0.3, 0.0, 0.6];
    cases.push(Case {
        label: "cournot 3 firms",
        problem: make_cournot(&three).unwrap(),
        cfg: plain.clone(),
    });
    cases.push(Case {
        label: "affine vi",
        problem: make_affine_vi(&random_affine_vi_spec(3, 3, 5))
            .unwrap()
            .to_problem()
            .unwrap(),
        cfg: plain.clone(),
    });
    cases.push(Case {
        label: "zero",
        problem: make_zero_problem(2, Point::new(vec![0.3, 0.6])).unwrap(),
        cfg: plain,
    });
    cases
}

/// A vanishing schedule fast enough for the anchored variant.
pub fn geometric(cfg: &SolverConfig) -> SolverConfig {
    SolverConfig {
        alpha: AlphaSchedule::Geometric(0.5),
        ..cfg.clone()
    }
}
