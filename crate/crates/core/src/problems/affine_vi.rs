//! Affine monotone variational inequalities `A_i(x) = M_i x + q_i` over a box
//! with a prescribed common solution.
//!
//! Given `x*` in the box, each offset is chosen as `q_i = −M_i x* + w_i`,
//! where `w_i` lies in the normal-cone direction of the box at `x*`
//! (`w ≥ 0` on coordinates at their lower bound, `w ≤ 0` at the upper bound,
//! `w = 0` elsewhere). Then `A_i(x*) = w_i` and `⟨A_i(x*), y − x*⟩ ≥ 0` for
//! every `y` in the box.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::oracle::VectorField;
use crate::point::Point;
use crate::problem::VariationalFamily;
use crate::set::FeasibleSet;

/// `A(x) = M x + q` with `M` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineField {
    dim: usize,
    matrix: Vec<f64>,
    offset: Vec<f64>,
}

impl AffineField {
    pub fn new(matrix: &DMatrix<f64>, offset: Vec<f64>) -> Result<Self> {
        let d = matrix.nrows();
        if matrix.ncols() != d || offset.len() != d || d == 0 {
            return Err(Error::config(
                "affine field needs a square matrix and a matching offset",
            ));
        }
        let rows = (0..d)
            .flat_map(|r| (0..d).map(move |c| (r, c)))
            .map(|(r, c)| matrix[(r, c)])
            .collect();
        Ok(AffineField {
            dim: d,
            matrix: rows,
            offset,
        })
    }
}

impl VectorField for AffineField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &Point) -> Point {
        Point::new(
            self.matrix
                .chunks_exact(self.dim)
                .zip(&self.offset)
                .map(|(row, q)| row.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>() + q)
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineViSpec {
    pub matrices: Vec<DMatrix<f64>>,
    /// Normal-cone components `w_i`; zero when `None`.
    pub normals: Option<Vec<Vec<f64>>>,
    pub solution: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub start: Vec<f64>,
}

/// Smallest eigenvalue of the symmetric part must be nonnegative (up to
/// rounding) for `x ↦ M x + q` to be monotone.
pub fn is_monotone(m: &DMatrix<f64>) -> bool {
    let sym = (m + m.transpose()) * 0.5;
    let scale = m.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    sym.symmetric_eigenvalues().iter().all(|&e| e >= -1e-12 * scale)
}

/// Spectral norm `‖M‖₂`.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Builds the family with `L = max_i ‖M_i‖₂`.
pub fn make_affine_vi(spec: &AffineViSpec) -> Result<VariationalFamily> {
    let d = spec.solution.len();
    if spec.matrices.is_empty() {
        return Err(Error::config("affine VI family needs at least one matrix"));
    }
    if spec.lower.len() != d || spec.upper.len() != d || spec.start.len() != d {
        return Err(Error::config("solution, bounds and start must share one dimension"));
    }
    let set = FeasibleSet::boxed(spec.lower.clone(), spec.upper.clone())?;
    let x_star = Point::new(spec.solution.clone());
    if !set.contains(&x_star, 0.0) {
        return Err(Error::config("prescribed solution lies outside the box"));
    }
    let normals = match &spec.normals {
        Some(w) if w.len() != spec.matrices.len() => {
            return Err(Error::config("need one normal vector per matrix"));
        }
        Some(w) => w.clone(),
        None => vec![vec![0.0; d]; spec.matrices.len()],
    };

    let mut fields: Vec<Arc<dyn VectorField>> = Vec::with_capacity(spec.matrices.len());
    let mut lipschitz: f64 = 0.0;
    for (i, (m, w)) in spec.matrices.iter().zip(&normals).enumerate() {
        if m.nrows() != d || m.ncols() != d || w.len() != d {
            return Err(Error::config(format!("matrix {i} does not match dimension {d}")));
        }
        if !is_monotone(m) {
            return Err(Error::config(format!(
                "matrix {i} is not positive semidefinite (field not monotone)"
            )));
        }
        for (k, &wk) in w.iter().enumerate() {
            let at_lower = spec.solution[k] == spec.lower[k];
            let at_upper = spec.solution[k] == spec.upper[k];
            let ok = (wk == 0.0) || (wk > 0.0 && at_lower) || (wk < 0.0 && at_upper);
            if !ok {
                return Err(Error::config(format!(
                    "normal {i} points outside the normal cone at coordinate {k}"
                )));
            }
        }
        let mx = m * nalgebra::DVector::from_column_slice(&spec.solution);
        let offset = (0..d).map(|k| w[k] - mx[k]).collect();
        fields.push(Arc::new(AffineField::new(m, offset)?));
        lipschitz = lipschitz.max(spectral_norm(m));
    }
    if !(lipschitz > 0.0) {
        return Err(Error::config(
            "all matrices vanish; the Lipschitz constant must be positive",
        ));
    }
    Ok(VariationalFamily {
        name: format!("affine-vi(N={}, d={d})", fields.len()),
        set,
        fields,
        lipschitz,
        start: Point::new(spec.start.clone()),
        known_solution: Some(x_star),
    })
}

/// Random family of `n` strongly monotone fields (`GᵀG + εI + K` with `K`
/// skew) on `[-1, 1]^d`, sharing an interior solution; the start is a
/// box corner.
pub fn random_affine_vi_spec(dim: usize, n: usize, seed: u64) -> AffineViSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0));
    let matrices = (0..n)
        .map(|_| {
            let g = draw(dim, dim);
            let k = draw(dim, dim);
            g.transpose() * &g + DMatrix::identity(dim, dim) * 0.5 + (&k - k.transpose()) * 0.5
        })
        .collect();
    let solution = draw(dim, 1).iter().map(|v| 0.5 * v).collect();
    AffineViSpec {
        matrices,
        normals: None,
        solution,
        lower: vec![-1.0; dim],
        upper: vec![1.0; dim],
        start: vec![1.0; dim],
    }
}
