//! Stationarity encodings for the supported problem classes.
//!
//! | problem        | state `z`          | `S(z)`                                              |
//! |----------------|--------------------|-----------------------------------------------------|
//! | unconstrained  | `x`                | `∇J(x)`                                             |
//! | constrained    | `(x, λ, μ)`        | `(∇ₓL, φ_ε(λ, -g(x)), h(x))`                        |
//! | exact (no FB)  | `(x, λ, μ)`        | `(∇ₓL, λᵀg, max(g,0), max(-λ,0), h)`, non-square    |
//! | minimax        | `(x, y, λ, μ)`     | `(∇ₓJ + …, -∇ᵧJ + …, φ_ε(λ, -G), Ax + By - b)`      |
//! | v-GNE          | `(x, λ, μ)`        | `(𝒢(x) + ∇gᵀλ + Aᵀμ, φ_ε(λ, -g), Ax - b)`           |
//!
//! # Sign convention for the complementarity rows
//!
//! `φ(a, b) = √(a² + b²) - (a + b)` vanishes exactly when `a ≥ 0`, `b ≥ 0`
//! and `ab = 0`. Inequalities are written `g(x) ≤ 0`, so the rows are
//! `φ_ε(λᵢ, -gᵢ(x))`: a zero row then means `λᵢ ≥ 0`, `gᵢ ≤ 0`,
//! `λᵢ gᵢ = 0` (up to the smoothing).

mod constrained;
mod gne;
mod kkt;
mod minimax;
mod unconstrained;

pub use constrained::{encode_constrained_exact, encode_constrained_fb, ConstrainedProblem, ExactKktModel};
pub use gne::{encode_gne, GneProblem};
pub use kkt::KktModel;
pub use minimax::{encode_minimax, MinimaxEquality, MinimaxProblem};
pub use unconstrained::{encode_unconstrained, UnconstrainedModel, UnconstrainedProblem};

use crate::linalg::{rank, Matrix};

/// Errors raised while building an encoding.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EncodingError {
    #[error("{what}: expected dimension {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{what} has rank {rank}, needs full row rank {rows}")]
    RankDeficient {
        what: &'static str,
        rank: usize,
        rows: usize,
    },
    #[error("smoothing parameter must be positive and finite, got {0}")]
    InvalidSmoothing(f64),
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },
}

pub(crate) fn expect_dim(what: &'static str, expected: usize, got: usize) -> Result<(), EncodingError> {
    if expected == got {
        Ok(())
    } else {
        Err(EncodingError::DimensionMismatch { what, expected, got })
    }
}

pub(crate) fn expect_full_row_rank(what: &'static str, a: &Matrix) -> Result<(), EncodingError> {
    let r = rank(a);
    if r < a.nrows() {
        return Err(EncodingError::RankDeficient {
            what,
            rank: r,
            rows: a.nrows(),
        });
    }
    Ok(())
}

pub(crate) fn check_smoothing(eps: f64) -> Result<(), EncodingError> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(EncodingError::InvalidSmoothing(eps))
    }
}

/// Smoothed Fischer–Burmeister function `√(a² + b² + ε²) - (a + b)`.
/// `ε = 0` gives the exact function.
#[inline]
pub fn fb_smooth(a: f64, b: f64, eps: f64) -> f64 {
    libm::hypot(libm::hypot(a, b), eps) - (a + b)
}

/// Partial derivatives `(∂φ_ε/∂a, ∂φ_ε/∂b)`. Both are strictly negative for
/// `ε > 0` (in `(-1, 0)` for a nonnegative argument, `(-2, -1]` otherwise);
/// at the kink of the exact function `(-1, -1)` is returned.
#[inline]
pub fn fb_partials(a: f64, b: f64, eps: f64) -> (f64, f64) {
    let r = libm::hypot(libm::hypot(a, b), eps);
    if r == 0.0 {
        (-1.0, -1.0)
    } else {
        (a / r - 1.0, b / r - 1.0)
    }
}
