//! Feedback realizations `u(z, t)` for the plant `ż = u`.
//!
//! With `V = ½‖S‖²` and `∇V = ∇Sᵀ S`:
//!
//! * **HGD** (Hessian-gradient): `u = -σ ∇V / ‖∇V‖²`. Enforces `V̇ = -σ`
//!   whenever `∇V ≠ 0`.
//! * **ND** (Newton): `u = -λ d` with `∇S d = S`, `λ = σ / (2V)`. Enforces
//!   `V̇ = -σ` whenever `∇S` is invertible.
//! * **GD** (gradient): `u = -γ S`, `γ = σ / (2mV)`. Gives `V̇ ≤ -σ` when the
//!   symmetric part of `∇S` is bounded below by `m I`.

use crate::law::{DecayLaw, LawError};
use crate::linalg::{lu_solve, Matrix, Vector};
use crate::model::{check_dim, ModelError, StationarityModel};

pub const DEFAULT_TOL_SING: f64 = 1e-12;
pub const DEFAULT_V_FLOOR: f64 = 1e-30;

/// Relative pivot threshold below which `∇S` is treated as singular.
const ND_PIVOT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("‖∇V‖ = {grad_norm:e} vanishes while ‖S‖ = {residual_norm:e}: nonsingularity fails at this state")]
    Singularity { grad_norm: f64, residual_norm: f64 },
    #[error("stationarity Jacobian is singular to working precision")]
    JacobianSingular,
    #[error("V = {0:e} is below the division floor; the state is already converged")]
    ConvergedAlready(f64),
    #[error("{realization} needs a square stationarity Jacobian, model maps {dim} states to {residual_dim} residuals")]
    UnsupportedRealization {
        realization: &'static str,
        dim: usize,
        residual_dim: usize,
    },
    #[error("invalid realization parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Law(#[from] LawError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum RealizationKind {
    Hgd,
    Nd,
    /// Gradient dynamics with monotonicity constant `m`.
    Gd {
        m: f64,
    },
}

/// A feedback realization plus the guards used around its divisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Realization {
    kind: RealizationKind,
    tol_sing: f64,
    v_floor: f64,
}

/// One field evaluation together with the quantities it was built from.
#[derive(Debug, Clone)]
pub struct FieldEval {
    pub u: Vector,
    pub residual: Vector,
    pub grad_v: Vector,
    pub v: f64,
    pub sigma: f64,
}

impl FieldEval {
    /// `V̇ = ∇Vᵀ u`.
    pub fn v_dot(&self) -> f64 {
        self.grad_v.dot(&self.u)
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<(), FieldError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(FieldError::InvalidParameter { name, value })
    }
}

impl Realization {
    pub fn hgd() -> Self {
        Self {
            kind: RealizationKind::Hgd,
            tol_sing: DEFAULT_TOL_SING,
            v_floor: DEFAULT_V_FLOOR,
        }
    }

    pub fn nd() -> Self {
        Self {
            kind: RealizationKind::Nd,
            ..Self::hgd()
        }
    }

    pub fn gd(m: f64) -> Result<Self, FieldError> {
        check_positive("m", m)?;
        Ok(Self {
            kind: RealizationKind::Gd { m },
            ..Self::hgd()
        })
    }

    pub fn new(kind: RealizationKind) -> Result<Self, FieldError> {
        match kind {
            RealizationKind::Hgd => Ok(Self::hgd()),
            RealizationKind::Nd => Ok(Self::nd()),
            RealizationKind::Gd { m } => Self::gd(m),
        }
    }

    pub fn with_guards(mut self, tol_sing: f64, v_floor: f64) -> Result<Self, FieldError> {
        check_positive("tol_sing", tol_sing)?;
        check_positive("v_floor", v_floor)?;
        self.tol_sing = tol_sing;
        self.v_floor = v_floor;
        Ok(self)
    }

    pub fn kind(&self) -> RealizationKind {
        self.kind
    }

    pub fn tol_sing(&self) -> f64 {
        self.tol_sing
    }

    pub fn v_floor(&self) -> f64 {
        self.v_floor
    }

    pub fn tag(&self) -> &'static str {
        match self.kind {
            RealizationKind::Hgd => "hgd",
            RealizationKind::Nd => "nd",
            RealizationKind::Gd { .. } => "gd",
        }
    }

    /// Whether the realization enforces the decay law with equality.
    pub fn enforces_equality(&self) -> bool {
        !matches!(self.kind, RealizationKind::Gd { .. })
    }

    /// Rejects model pairings the realization cannot handle.
    pub fn check_model(&self, model: &(impl StationarityModel + ?Sized)) -> Result<(), FieldError> {
        if !matches!(self.kind, RealizationKind::Hgd) && !model.is_square() {
            return Err(FieldError::UnsupportedRealization {
                realization: self.tag(),
                dim: model.dim(),
                residual_dim: model.residual_dim(),
            });
        }
        Ok(())
    }

    /// Evaluates the closed-loop field at `(z, t)`.
    pub fn evaluate(
        &self,
        model: &(impl StationarityModel + ?Sized),
        law: &DecayLaw,
        z: &Vector,
        t: f64,
    ) -> Result<FieldEval, FieldError> {
        check_dim(model, z)?;
        self.check_model(model)?;
        let (s, jac) = model.residual_and_jacobian(z)?;
        if !s.iter().all(|x| x.is_finite()) {
            return Err(ModelError::NonFinite("stationarity vector").into());
        }
        let v = 0.5 * s.norm_squared();
        let grad_v = jac.tr_mul(&s);
        if v <= self.v_floor {
            return Err(FieldError::ConvergedAlready(v));
        }
        let sigma = law.sigma(v, t)?;
        let u = match self.kind {
            RealizationKind::Hgd => hgd_direction(&grad_v, &s, sigma, self.tol_sing)?,
            RealizationKind::Nd => nd_direction(&jac, &s, sigma / (2.0 * v))?,
            RealizationKind::Gd { m } => -(sigma / (2.0 * m * v)) * &s,
        };
        Ok(FieldEval {
            u,
            residual: s,
            grad_v,
            v,
            sigma,
        })
    }
}

fn hgd_direction(grad_v: &Vector, s: &Vector, sigma: f64, tol_sing: f64) -> Result<Vector, FieldError> {
    let g2 = grad_v.norm_squared();
    let g = libm::sqrt(g2);
    let s_norm = s.norm();
    if g <= tol_sing * (1.0 + s_norm) {
        return Err(FieldError::Singularity {
            grad_norm: g,
            residual_norm: s_norm,
        });
    }
    Ok(-(sigma / g2) * grad_v)
}

fn nd_direction(jac: &Matrix, s: &Vector, gain: f64) -> Result<Vector, FieldError> {
    let d = lu_solve(jac, s, ND_PIVOT_TOL).ok_or(FieldError::JacobianSingular)?;
    Ok(-gain * d)
}

/// Hessian-gradient field `u = -σ ∇V / ‖∇V‖²`.
pub fn hgd_field(
    model: &(impl StationarityModel + ?Sized),
    law: &DecayLaw,
    z: &Vector,
    t: f64,
) -> Result<Vector, FieldError> {
    Realization::hgd().evaluate(model, law, z, t).map(|e| e.u)
}

/// Newton field `u = -σ/(2V) · ∇S⁻¹ S`, computed by a linear solve.
pub fn nd_field(
    model: &(impl StationarityModel + ?Sized),
    law: &DecayLaw,
    z: &Vector,
    t: f64,
) -> Result<Vector, FieldError> {
    Realization::nd().evaluate(model, law, z, t).map(|e| e.u)
}

/// Gradient field `u = -σ/(2mV) · S`.
pub fn gd_field(
    model: &(impl StationarityModel + ?Sized),
    law: &DecayLaw,
    z: &Vector,
    t: f64,
    m: f64,
) -> Result<Vector, FieldError> {
    Realization::gd(m)?.evaluate(model, law, z, t).map(|e| e.u)
}
