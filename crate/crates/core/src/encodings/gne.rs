use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use super::kkt::{KktModel, KktParts};
use super::{expect_dim, expect_full_row_rank, EncodingError};
use crate::maps::{AffineMap, ConstraintMap, VectorMap};
use crate::model::{ModelInfo, StateRole};

/// Generalized Nash game with shared constraints `g(x) ≤ 0`, `Ax = b`,
/// solved for its variational equilibrium (one multiplier per shared
/// constraint).
pub struct GneProblem {
    pub name: String,
    /// `n₁, …, n_N`; the joint strategy has dimension `Σ nₖ`.
    pub player_dims: Vec<usize>,
    /// `𝒢(x) = (∇ₓ₁J₁, …, ∇ₓₙJ_N)` with Jacobian `∇𝒢`.
    pub pseudogradient: Box<dyn VectorMap>,
    pub eq: Option<AffineMap>,
    pub ineq: Option<Box<dyn ConstraintMap>>,
    /// `m` with `(x - x')ᵀ(𝒢(x) - 𝒢(x')) ≥ m‖x - x'‖²`, if known.
    pub monotonicity: Option<f64>,
}

/// Smoothed-FB KKT encoding on `z = (x, λ, μ)`.
pub fn encode_gne(p: GneProblem, eps: f64) -> Result<KktModel, EncodingError> {
    if p.player_dims.is_empty() || p.player_dims.contains(&0) {
        return Err(EncodingError::InvalidParameter {
            name: "player_dims",
            reason: "every player needs at least one decision variable",
        });
    }
    if let Some(m) = p.monotonicity {
        if !(m > 0.0 && m.is_finite()) {
            return Err(EncodingError::InvalidParameter {
                name: "monotonicity",
                reason: "must be positive",
            });
        }
    }
    let n: usize = p.player_dims.iter().sum();
    expect_dim("pseudogradient input", n, p.pseudogradient.input_dim())?;
    let eq: Option<Box<dyn ConstraintMap>> = match p.eq {
        Some(a) => {
            expect_dim("equality matrix columns", n, a.a.ncols())?;
            expect_full_row_rank("equality matrix", &a.a)?;
            Some(Box::new(a))
        }
        None => None,
    };
    KktModel::new(
        KktParts {
            field: p.pseudogradient,
            ineq: p.ineq,
            eq,
            eps,
        },
        &[(StateRole::PrimalX, n)],
        ModelInfo {
            name: p.name,
            monotonicity: p.monotonicity,
            smoothing: None,
        },
    )
}
