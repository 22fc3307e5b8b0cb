//! Variational-inequality specialization against independent references.

mod common;

use common::oracles::hybrid_extragradient_step;
use equihybrid::problems::{make_affine_vi, random_affine_vi_spec, AffineViSpec};
use equihybrid::solvers::{solve_vi, StopReason};
use equihybrid::{Error, Point, SolverConfig};
use nalgebra::DMatrix;

#[test]
fn single_field_matches_hybrid_extragradient_reference() {
    let spec = random_affine_vi_spec(2, 1, 4);
    let fam = make_affine_vi(&spec).unwrap();
    let rho = 0.8 / fam.lipschitz;
    let cfg = SolverConfig {
        rho: Some(rho),
        max_iter: 200,
        tol_step: f64::MIN_POSITIVE,
        ..Default::default()
    };
    let r = solve_vi(&fam, &cfg).unwrap();
    assert_eq!(r.trace.len(), 200);

    // Local agreement: the same x_n yields the same x_{n+1}.
    let mut x = fam.start.to_vec();
    let mut worst: f64 = 0.0;
    for t in &r.trace {
        let expected = hybrid_extragradient_step(&fam, &spec.lower, &spec.upper, rho, &x);
        worst = worst.max(t.x.dist(&Point::new(expected)));
        x = t.x.to_vec();
    }
    assert!(worst <= 1e-12, "worst one-step deviation {worst:e}");

    // Global agreement over the opening stretch, before the nearly parallel
    // cuts start amplifying rounding differences.
    let mut x = fam.start.to_vec();
    for t in r.trace.iter().take(15) {
        x = hybrid_extragradient_step(&fam, &spec.lower, &spec.upper, rho, &x);
        let gap = t.x.dist(&Point::new(x.clone()));
        assert!(gap <= 1e-12, "iteration {}: {gap:e}", t.n);
    }
}

#[test]
fn zero_field_keeps_the_start() {
    let spec = AffineViSpec {
        matrices: vec![DMatrix::zeros(2, 2), DMatrix::identity(2, 2) * 1e-3],
        normals: None,
        solution: vec![0.5, 0.5],
        lower: vec![0.0, 0.0],
        upper: vec![1.0, 1.0],
        start: vec![0.5, 0.5],
    };
    let fam = make_affine_vi(&spec).unwrap();
    let r = solve_vi(&fam, &SolverConfig::default()).unwrap();
    assert_eq!(r.stop_reason, StopReason::FixedPointExact);
    assert_eq!(r.solution, Point::new(vec![0.5, 0.5]));
}

#[test]
fn rho_at_inverse_lipschitz_is_rejected() {
    let fam = make_affine_vi(&random_affine_vi_spec(3, 3, 0)).unwrap();
    let cfg = SolverConfig {
        rho: Some(1.0 / fam.lipschitz),
        ..Default::default()
    };
    assert!(matches!(solve_vi(&fam, &cfg), Err(Error::Config(_))));
}

#[test]
fn family_distance_to_common_solution_decreases() {
    let fam = make_affine_vi(&random_affine_vi_spec(3, 3, 2)).unwrap();
    let cfg = SolverConfig {
        max_iter: 300,
        ..Default::default()
    };
    let r = solve_vi(&fam, &cfg).unwrap();
    let d: Vec<f64> = r.trace.iter().map(|t| t.dist_to_known.unwrap()).collect();
    assert!(d.last().unwrap() < &(0.1 * d[0]));
}
