use alloc::boxed::Box;
use alloc::string::String;

use super::{expect_dim, EncodingError};
use crate::linalg::{Matrix, Vector};
use crate::maps::VectorMap;
use crate::model::{BlockLayout, ModelError, ModelInfo, StationarityModel};

/// `min J(x)` given through its gradient map (whose Jacobian is `∇²J`).
pub struct UnconstrainedProblem {
    pub name: String,
    pub gradient: Box<dyn VectorMap>,
    /// `m` with `∇²J ⪰ m I`, if known.
    pub strong_convexity: Option<f64>,
}

/// `S(x) = ∇J(x)`, `∇S = ∇²J(x)`.
pub struct UnconstrainedModel {
    gradient: Box<dyn VectorMap>,
    layout: BlockLayout,
    info: ModelInfo,
}

pub fn encode_unconstrained(p: UnconstrainedProblem) -> Result<UnconstrainedModel, EncodingError> {
    let n = p.gradient.input_dim();
    expect_dim("gradient output", n, p.gradient.output_dim())?;
    if let Some(m) = p.strong_convexity {
        if !(m > 0.0 && m.is_finite()) {
            return Err(EncodingError::InvalidParameter {
                name: "strong_convexity",
                reason: "must be positive",
            });
        }
    }
    let layout = BlockLayout::primal(n).map_err(|_| EncodingError::DimensionMismatch {
        what: "objective dimension",
        expected: 1,
        got: 0,
    })?;
    Ok(UnconstrainedModel {
        gradient: p.gradient,
        layout,
        info: ModelInfo {
            name: p.name,
            monotonicity: p.strong_convexity,
            smoothing: None,
        },
    })
}

impl StationarityModel for UnconstrainedModel {
    fn layout(&self) -> &BlockLayout {
        &self.layout
    }

    fn info(&self) -> &ModelInfo {
        &self.info
    }

    fn residual(&self, z: &Vector) -> Result<Vector, ModelError> {
        self.gradient.value(z)
    }

    fn jacobian(&self, z: &Vector) -> Result<Matrix, ModelError> {
        self.gradient.jacobian(z)
    }
}
