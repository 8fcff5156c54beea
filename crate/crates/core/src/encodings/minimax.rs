use alloc::boxed::Box;
use alloc::string::String;

use super::kkt::{KktModel, KktParts};
use super::{expect_dim, expect_full_row_rank, EncodingError};
use crate::linalg::{Matrix, Vector};
use crate::maps::{AffineMap, ConstraintMap, MapResult, VectorMap};
use crate::model::{ModelInfo, StateRole};

/// Equality `Ax + By = b` coupling the two players.
#[derive(Debug, Clone)]
pub struct MinimaxEquality {
    pub a: Matrix,
    pub b_mat: Matrix,
    pub b: Vector,
}

/// `min_x max_y J(x, y)` subject to `G(x, y) ≤ 0`, `Ax + By = b`.
pub struct MinimaxProblem {
    pub name: String,
    pub n_x: usize,
    pub n_y: usize,
    /// `(∇ₓJ, ∇ᵧJ)` over the joint variable, with the full Hessian of `J`
    /// as its Jacobian.
    pub gradient: Box<dyn VectorMap>,
    pub coupled_ineq: Option<Box<dyn ConstraintMap>>,
    pub eq: Option<MinimaxEquality>,
}

/// `(∇ₓJ, -∇ᵧJ)`: descent in `x`, ascent in `y`.
struct SaddleField {
    inner: Box<dyn VectorMap>,
    n_x: usize,
}

impl VectorMap for SaddleField {
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    fn output_dim(&self) -> usize {
        self.inner.output_dim()
    }

    fn value(&self, z: &Vector) -> MapResult<Vector> {
        let mut v = self.inner.value(z)?;
        let n = v.len();
        v.rows_mut(self.n_x, n - self.n_x).neg_mut();
        Ok(v)
    }

    fn jacobian(&self, z: &Vector) -> MapResult<Matrix> {
        let mut j = self.inner.jacobian(z)?;
        let n = j.nrows();
        j.rows_mut(self.n_x, n - self.n_x).neg_mut();
        Ok(j)
    }
}

/// Smoothed-FB KKT encoding on `z = (x, y, λ, μ)`.
pub fn encode_minimax(p: MinimaxProblem, eps: f64) -> Result<KktModel, EncodingError> {
    let n = p.n_x + p.n_y;
    expect_dim("gradient input", n, p.gradient.input_dim())?;
    expect_dim("gradient output", n, p.gradient.output_dim())?;
    let eq: Option<Box<dyn ConstraintMap>> = match p.eq {
        Some(e) => {
            let q = e.b.len();
            expect_dim("equality block A rows", q, e.a.nrows())?;
            expect_dim("equality block B rows", q, e.b_mat.nrows())?;
            expect_dim("equality block A columns", p.n_x, e.a.ncols())?;
            expect_dim("equality block B columns", p.n_y, e.b_mat.ncols())?;
            let mut ab = Matrix::zeros(q, n);
            ab.view_mut((0, 0), (q, p.n_x)).copy_from(&e.a);
            ab.view_mut((0, p.n_x), (q, p.n_y)).copy_from(&e.b_mat);
            expect_full_row_rank("equality matrix [A B]", &ab)?;
            let map = AffineMap::new(ab, e.b).map_err(|_| EncodingError::DimensionMismatch {
                what: "equality offset",
                expected: q,
                got: 0,
            })?;
            Some(Box::new(map))
        }
        None => None,
    };
    KktModel::new(
        KktParts {
            field: Box::new(SaddleField {
                inner: p.gradient,
                n_x: p.n_x,
            }),
            ineq: p.coupled_ineq,
            eq,
            eps,
        },
        &[(StateRole::PrimalX, p.n_x), (StateRole::PrimalY, p.n_y)],
        ModelInfo {
            name: p.name,
            ..ModelInfo::default()
        },
    )
}
