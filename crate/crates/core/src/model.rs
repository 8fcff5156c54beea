//! The stationarity-model contract and the quadratic Lyapunov function.
//!
//! Every problem class is reduced to a residual map `S(z)` over a flat state
//! vector `z`. The Lyapunov function is `V(z) = ½‖S(z)‖²` with gradient
//! `∇V = ∇S(z)ᵀ S(z)`; it vanishes exactly on the stationarity set.

use alloc::string::String;
use alloc::vec::Vec;

use crate::linalg::{norm_inf, Matrix, Vector};

/// Errors raised while evaluating a model.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("state component {index} = {value} left the domain (must exceed {min})")]
    DomainViolation { index: usize, value: f64, min: f64 },
    #[error("{what}: expected dimension {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

/// Role of a contiguous block of the state vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum StateRole {
    PrimalX,
    PrimalY,
    IneqMultiplier,
    EqMultiplier,
}

/// Role of a contiguous block of the residual vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ResidualRole {
    /// Gradient of the Lagrangian (or pseudogradient) rows.
    Stationarity,
    /// Complementarity / feasibility rows of the inequalities.
    Inequality,
    /// Equality-constraint rows.
    Equality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block<R> {
    pub role: R,
    pub start: usize,
    pub len: usize,
}

impl<R> Block<R> {
    pub fn range(&self) -> core::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// Partition of the state vector `z` and of the residual `S(z)` into named
/// contiguous blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLayout {
    state: Vec<Block<StateRole>>,
    residual: Vec<Block<ResidualRole>>,
}

fn stack<R: Copy>(parts: &[(R, usize)]) -> (Vec<Block<R>>, usize) {
    let mut start = 0;
    let mut blocks = Vec::with_capacity(parts.len());
    for &(role, len) in parts {
        if len > 0 {
            blocks.push(Block { role, start, len });
        }
        start += len;
    }
    (blocks, start)
}

impl BlockLayout {
    /// Builds a layout by stacking the given blocks in order. Zero-length
    /// blocks are dropped.
    pub fn new(state: &[(StateRole, usize)], residual: &[(ResidualRole, usize)]) -> Result<Self, ModelError> {
        let (state, n) = stack(state);
        let (residual, r) = stack(residual);
        if n == 0 {
            return Err(ModelError::DimensionMismatch {
                what: "state dimension",
                expected: 1,
                got: 0,
            });
        }
        if r == 0 {
            return Err(ModelError::DimensionMismatch {
                what: "residual dimension",
                expected: 1,
                got: 0,
            });
        }
        Ok(Self { state, residual })
    }

    /// Single primal block with a matching stationarity residual.
    pub fn primal(n: usize) -> Result<Self, ModelError> {
        Self::new(&[(StateRole::PrimalX, n)], &[(ResidualRole::Stationarity, n)])
    }

    pub fn state_dim(&self) -> usize {
        self.state.last().map_or(0, |b| b.start + b.len)
    }

    pub fn residual_dim(&self) -> usize {
        self.residual.last().map_or(0, |b| b.start + b.len)
    }

    pub fn state_blocks(&self) -> &[Block<StateRole>] {
        &self.state
    }

    pub fn residual_blocks(&self) -> &[Block<ResidualRole>] {
        &self.residual
    }

    /// Range of the first state block with `role`, if present.
    pub fn state_range(&self, role: StateRole) -> Option<core::ops::Range<usize>> {
        self.state.iter().find(|b| b.role == role).map(Block::range)
    }

    /// Sum of lengths of residual blocks with `role`.
    pub fn residual_len(&self, role: ResidualRole) -> usize {
        self.residual.iter().filter(|b| b.role == role).map(|b| b.len).sum()
    }
}

/// Descriptive metadata carried by a model.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelInfo {
    pub name: String,
    /// Lower bound `m` on the symmetric part of `∇S`, when known.
    pub monotonicity: Option<f64>,
    /// Fischer–Burmeister smoothing `ε`, when applicable.
    pub smoothing: Option<f64>,
}

/// A problem encoded as a residual map `S(z)` with an analytic Jacobian.
///
/// Most encodings are square (`residual_dim == dim`). Non-square encodings
/// can only be paired with the Hessian-gradient realization.
pub trait StationarityModel: Send + Sync {
    fn layout(&self) -> &BlockLayout;

    fn info(&self) -> &ModelInfo;

    fn residual(&self, z: &Vector) -> Result<Vector, ModelError>;

    /// `∇S(z)`, of shape `residual_dim × dim`.
    fn jacobian(&self, z: &Vector) -> Result<Matrix, ModelError>;

    fn residual_and_jacobian(&self, z: &Vector) -> Result<(Vector, Matrix), ModelError> {
        Ok((self.residual(z)?, self.jacobian(z)?))
    }

    fn dim(&self) -> usize {
        self.layout().state_dim()
    }

    fn residual_dim(&self) -> usize {
        self.layout().residual_dim()
    }

    fn is_square(&self) -> bool {
        self.dim() == self.residual_dim()
    }
}

impl<M: StationarityModel + ?Sized> StationarityModel for alloc::boxed::Box<M> {
    fn layout(&self) -> &BlockLayout {
        (**self).layout()
    }
    fn info(&self) -> &ModelInfo {
        (**self).info()
    }
    fn residual(&self, z: &Vector) -> Result<Vector, ModelError> {
        (**self).residual(z)
    }
    fn jacobian(&self, z: &Vector) -> Result<Matrix, ModelError> {
        (**self).jacobian(z)
    }
    fn residual_and_jacobian(&self, z: &Vector) -> Result<(Vector, Matrix), ModelError> {
        (**self).residual_and_jacobian(z)
    }
}

pub(crate) fn check_dim(model: &(impl StationarityModel + ?Sized), z: &Vector) -> Result<(), ModelError> {
    if z.len() != model.dim() {
        return Err(ModelError::DimensionMismatch {
            what: "state vector",
            expected: model.dim(),
            got: z.len(),
        });
    }
    Ok(())
}

/// `V(z) = ½‖S(z)‖²`.
pub fn olf_value(model: &(impl StationarityModel + ?Sized), z: &Vector) -> Result<f64, ModelError> {
    check_dim(model, z)?;
    let s = model.residual(z)?;
    Ok(0.5 * s.norm_squared())
}

/// `∇V(z) = ∇S(z)ᵀ S(z)`.
pub fn olf_gradient(model: &(impl StationarityModel + ?Sized), z: &Vector) -> Result<Vector, ModelError> {
    check_dim(model, z)?;
    let (s, jac) = model.residual_and_jacobian(z)?;
    Ok(jac.tr_mul(&s))
}

/// Default central-difference step for [`fd_check`]: `10⁻⁶ (1 + ‖z‖∞)`.
pub fn default_fd_step(z: &Vector) -> f64 {
    1e-6 * (1.0 + norm_inf(z))
}

/// Largest entrywise relative discrepancy between the analytic Jacobian and
/// central differences of `S`:
/// `max |(S(z+h eⱼ) - S(z-h eⱼ))/(2h) - ∇S(z)ᵢⱼ| / (1 + |∇S(z)ᵢⱼ|)`.
pub fn fd_check(model: &(impl StationarityModel + ?Sized), z: &Vector, h: Option<f64>) -> Result<f64, ModelError> {
    check_dim(model, z)?;
    let h = h.unwrap_or_else(|| default_fd_step(z));
    let jac = model.jacobian(z)?;
    let mut worst: f64 = 0.0;
    let mut zp = z.clone();
    for j in 0..z.len() {
        zp[j] = z[j] + h;
        let sp = model.residual(&zp)?;
        zp[j] = z[j] - h;
        let sm = model.residual(&zp)?;
        zp[j] = z[j];
        for i in 0..jac.nrows() {
            let fd = (sp[i] - sm[i]) / (2.0 * h);
            let an = jac[(i, j)];
            let err = (fd - an).abs() / (1.0 + an.abs());
            if !err.is_finite() {
                return Err(ModelError::NonFinite("finite-difference Jacobian"));
            }
            worst = worst.max(err);
        }
    }
    Ok(worst)
}

/// Euclidean norms of the residual grouped by [`ResidualRole`]. Roles absent
/// from the layout report 0.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BlockResiduals {
    pub stationarity: f64,
    pub equality: f64,
    pub inequality: f64,
}

impl BlockResiduals {
    pub fn from_residual(layout: &BlockLayout, s: &Vector) -> Self {
        let mut sq = [0.0_f64; 3];
        for block in layout.residual_blocks() {
            let slot = match block.role {
                ResidualRole::Stationarity => 0,
                ResidualRole::Equality => 1,
                ResidualRole::Inequality => 2,
            };
            sq[slot] += s.rows(block.start, block.len).norm_squared();
        }
        Self {
            stationarity: libm::sqrt(sq[0]),
            equality: libm::sqrt(sq[1]),
            inequality: libm::sqrt(sq[2]),
        }
    }

    pub fn max(&self) -> f64 {
        self.stationarity.max(self.equality).max(self.inequality)
    }

    pub fn get(&self, role: ResidualRole) -> f64 {
        match role {
            ResidualRole::Stationarity => self.stationarity,
            ResidualRole::Equality => self.equality,
            ResidualRole::Inequality => self.inequality,
        }
    }
}

/// Per-block residual norms at `z`.
pub fn block_residuals(model: &(impl StationarityModel + ?Sized), z: &Vector) -> Result<BlockResiduals, ModelError> {
    check_dim(model, z)?;
    let s = model.residual(z)?;
    Ok(BlockResiduals::from_residual(model.layout(), &s))
}


#[cfg(test)]
mod tests {
    use super::testing::AffineModel;
    use super::*;
    use alloc::vec;

    fn identity_model(n: usize) -> AffineModel {
        AffineModel::new(Matrix::identity(n, n), Vector::zeros(n))
    }

    #[test]
    fn value_examples() {
        let m = identity_model(2);
        assert_eq!(olf_value(&m, &Vector::zeros(2)).unwrap(), 0.0);
        assert_eq!(olf_value(&m, &Vector::from_vec(vec![3.0, 4.0])).unwrap(), 12.5);
        assert_eq!(olf_value(&m, &Vector::from_vec(vec![1.0, 1.0])).unwrap(), 1.0);
    }

    #[test]
    fn gradient_examples() {
        let m = identity_model(2);
        assert_eq!(olf_gradient(&m, &Vector::zeros(2)).unwrap(), Vector::zeros(2));
        let g = olf_gradient(&m, &Vector::from_vec(vec![1.0, 0.0])).unwrap();
        assert_eq!(g, Vector::from_vec(vec![1.0, 0.0]));
    }

    #[test]
    fn fd_check_is_exact_for_affine_maps() {
        let a = Matrix::from_row_slice(3, 3, &[2.0, -1.0, 0.5, 3.0, 4.0, -2.0, 0.0, 1.0, 7.0]);
        let m = AffineModel::new(a, Vector::from_vec(vec![1.0, -2.0, 3.0]));
        let z = Vector::from_vec(vec![0.3, -1.2, 2.5]);
        assert!(fd_check(&m, &z, None).unwrap() <= 1e-9);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let m = identity_model(2);
        assert!(matches!(
            olf_value(&m, &Vector::zeros(3)),
            Err(ModelError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn block_residual_example() {
        let layout = BlockLayout::new(
            &[(StateRole::PrimalX, 2), (StateRole::IneqMultiplier, 2)],
            &[(ResidualRole::Stationarity, 2), (ResidualRole::Inequality, 2)],
        )
        .unwrap();
        let m = identity_model(4).with_layout(layout);
        let z = Vector::from_vec(vec![3.0, 0.0, 4.0, 0.0]);
        let r = block_residuals(&m, &z).unwrap();
        assert_eq!(r.stationarity, 3.0);
        assert_eq!(r.inequality, 4.0);
        assert_eq!(r.equality, 0.0);
        assert!(r.max() <= 5.0);
        let zero = block_residuals(&m, &Vector::zeros(4)).unwrap();
        assert_eq!(zero.max(), 0.0);
    }

    #[test]
    fn layout_rejects_empty_state() {
        assert!(BlockLayout::new(&[(StateRole::PrimalX, 0)], &[(ResidualRole::Stationarity, 1)]).is_err());
        let l = BlockLayout::new(
            &[
                (StateRole::PrimalX, 2),
                (StateRole::IneqMultiplier, 0),
                (StateRole::EqMultiplier, 1),
            ],
            &[(ResidualRole::Stationarity, 3)],
        )
        .unwrap();
        assert_eq!(l.state_dim(), 3);
        assert_eq!(l.state_range(StateRole::EqMultiplier), Some(2..3));
        assert_eq!(l.state_range(StateRole::IneqMultiplier), None);
    }
}
