//! Smooth maps used as problem callbacks.
//!
//! A [`VectorMap`] is any `F: ℝⁿ → ℝᵐ` with a Jacobian: the gradient of an
//! objective (Jacobian = Hessian), a game pseudogradient, or a constraint
//! function. Constraints additionally expose the multiplier-weighted sum of
//! their component Hessians through [`ConstraintMap`].

use alloc::boxed::Box;

use crate::linalg::{Matrix, Vector};
use crate::model::ModelError;

pub type MapResult<T> = Result<T, ModelError>;

/// `F: ℝⁿ → ℝᵐ` with Jacobian `∇F ∈ ℝ^{m×n}`.
pub trait VectorMap: Send + Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn value(&self, x: &Vector) -> MapResult<Vector>;
    fn jacobian(&self, x: &Vector) -> MapResult<Matrix>;
}

/// A constraint function `g: ℝⁿ → ℝᵐ`.
pub trait ConstraintMap: VectorMap {
    /// `Σᵢ wᵢ ∇²gᵢ(x)`, an `n×n` matrix.
    fn weighted_hessian(&self, x: &Vector, weights: &Vector) -> MapResult<Matrix>;

    /// The matrix `A` when the map is affine `x ↦ A x - b`.
    fn affine_matrix(&self) -> Option<&Matrix> {
        None
    }
}

/// `x ↦ A x - b`.
#[derive(Debug, Clone)]
pub struct AffineMap {
    pub a: Matrix,
    pub b: Vector,
}

impl AffineMap {
    pub fn new(a: Matrix, b: Vector) -> MapResult<Self> {
        if a.nrows() != b.len() {
            return Err(ModelError::DimensionMismatch {
                what: "affine offset",
                expected: a.nrows(),
                got: b.len(),
            });
        }
        Ok(Self { a, b })
    }
}

impl VectorMap for AffineMap {
    fn input_dim(&self) -> usize {
        self.a.ncols()
    }

    fn output_dim(&self) -> usize {
        self.a.nrows()
    }

    fn value(&self, x: &Vector) -> MapResult<Vector> {
        Ok(&self.a * x - &self.b)
    }

    fn jacobian(&self, _x: &Vector) -> MapResult<Matrix> {
        Ok(self.a.clone())
    }
}

impl ConstraintMap for AffineMap {
    fn weighted_hessian(&self, _x: &Vector, _weights: &Vector) -> MapResult<Matrix> {
        let n = self.a.ncols();
        Ok(Matrix::zeros(n, n))
    }

    fn affine_matrix(&self) -> Option<&Matrix> {
        Some(&self.a)
    }
}

type ValueFn = Box<dyn Fn(&Vector) -> MapResult<Vector> + Send + Sync>;
type JacobianFn = Box<dyn Fn(&Vector) -> MapResult<Matrix> + Send + Sync>;
type WeightedHessianFn = Box<dyn Fn(&Vector, &Vector) -> MapResult<Matrix> + Send + Sync>;

/// A [`VectorMap`] / [`ConstraintMap`] built from closures.
pub struct FnMap {
    input_dim: usize,
    output_dim: usize,
    value: ValueFn,
    jacobian: JacobianFn,
    weighted_hessian: Option<WeightedHessianFn>,
}

impl FnMap {
    pub fn new<V, J>(input_dim: usize, output_dim: usize, value: V, jacobian: J) -> Self
    where
        V: Fn(&Vector) -> MapResult<Vector> + Send + Sync + 'static,
        J: Fn(&Vector) -> MapResult<Matrix> + Send + Sync + 'static,
    {
        Self {
            input_dim,
            output_dim,
            value: Box::new(value),
            jacobian: Box::new(jacobian),
            weighted_hessian: None,
        }
    }

    /// Attaches `Σᵢ wᵢ ∇²gᵢ`. Without it the map is treated as having zero
    /// curvature.
    pub fn with_weighted_hessian<H>(mut self, h: H) -> Self
    where
        H: Fn(&Vector, &Vector) -> MapResult<Matrix> + Send + Sync + 'static,
    {
        self.weighted_hessian = Some(Box::new(h));
        self
    }
}

impl core::fmt::Debug for FnMap {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FnMap")
            .field("input_dim", &self.input_dim)
            .field("output_dim", &self.output_dim)
            .finish_non_exhaustive()
    }
}

impl VectorMap for FnMap {
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn value(&self, x: &Vector) -> MapResult<Vector> {
        (self.value)(x)
    }

    fn jacobian(&self, x: &Vector) -> MapResult<Matrix> {
        (self.jacobian)(x)
    }
}

impl ConstraintMap for FnMap {
    fn weighted_hessian(&self, x: &Vector, weights: &Vector) -> MapResult<Matrix> {
        match &self.weighted_hessian {
            Some(h) => h(x, weights),
            None => Ok(Matrix::zeros(self.input_dim, self.input_dim)),
        }
    }
}
