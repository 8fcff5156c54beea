use alloc::boxed::Box;

use super::{check_smoothing, expect_dim, fb_partials, fb_smooth, EncodingError};
use crate::linalg::{Matrix, Vector};
use crate::maps::{ConstraintMap, VectorMap};
use crate::model::{BlockLayout, ModelError, ModelInfo, ResidualRole, StateRole, StationarityModel};

/// Smoothed-FB KKT residual shared by the constrained, minimax and v-GNE
/// encodings.
///
/// The primal field `F` is `∇J` for minimization, the sign-flipped gradient
/// `(∇ₓJ, -∇ᵧJ)` for minimax, and the pseudogradient `𝒢` for games. With
/// `z = (x, λ, μ)`:
///
/// ```text
/// S(z) = ( F(x) + ∇g(x)ᵀλ + ∇h(x)ᵀμ,
///          φ_ε(λᵢ, -gᵢ(x))  for each i,
///          h(x) )
/// ```
pub struct KktModel {
    field: Box<dyn VectorMap>,
    ineq: Option<Box<dyn ConstraintMap>>,
    eq: Option<Box<dyn ConstraintMap>>,
    eps: f64,
    np: usize,
    m: usize,
    q: usize,
    layout: BlockLayout,
    info: ModelInfo,
}

pub(crate) struct KktParts {
    pub field: Box<dyn VectorMap>,
    pub ineq: Option<Box<dyn ConstraintMap>>,
    pub eq: Option<Box<dyn ConstraintMap>>,
    pub eps: f64,
}

/// Checks a constraint map against the primal dimension and returns its
/// output dimension (0 when absent).
pub(crate) fn constraint_rows(
    what: &'static str,
    map: Option<&dyn ConstraintMap>,
    np: usize,
) -> Result<usize, EncodingError> {
    match map {
        Some(g) => {
            expect_dim(what, np, g.input_dim())?;
            Ok(g.output_dim())
        }
        None => Ok(0),
    }
}

impl KktModel {
    pub(crate) fn new(
        parts: KktParts,
        primal_blocks: &[(StateRole, usize)],
        mut info: ModelInfo,
    ) -> Result<Self, EncodingError> {
        check_smoothing(parts.eps)?;
        let np: usize = primal_blocks.iter().map(|b| b.1).sum();
        expect_dim("primal field input", np, parts.field.input_dim())?;
        expect_dim("primal field output", np, parts.field.output_dim())?;
        let m = constraint_rows("inequality map input", parts.ineq.as_deref(), np)?;
        let q = constraint_rows("equality map input", parts.eq.as_deref(), np)?;
        let mut state = alloc::vec::Vec::from(primal_blocks);
        state.push((StateRole::IneqMultiplier, m));
        state.push((StateRole::EqMultiplier, q));
        let layout = BlockLayout::new(
            &state,
            &[
                (ResidualRole::Stationarity, np),
                (ResidualRole::Inequality, m),
                (ResidualRole::Equality, q),
            ],
        )
        .map_err(|_| EncodingError::DimensionMismatch {
            what: "primal dimension",
            expected: 1,
            got: 0,
        })?;
        info.smoothing = Some(parts.eps);
        Ok(Self {
            field: parts.field,
            ineq: parts.ineq,
            eq: parts.eq,
            eps: parts.eps,
            np,
            m,
            q,
            layout,
            info,
        })
    }

    pub fn smoothing(&self) -> f64 {
        self.eps
    }

    pub fn primal_dim(&self) -> usize {
        self.np
    }

    pub fn inequality_count(&self) -> usize {
        self.m
    }

    pub fn equality_count(&self) -> usize {
        self.q
    }

    /// `g(x)` at the primal part of `z` (empty when there are no inequalities).
    pub fn inequality_values(&self, z: &Vector) -> Result<Vector, ModelError> {
        let x = z.rows(0, self.np).into_owned();
        match &self.ineq {
            Some(g) => g.value(&x),
            None => Ok(Vector::zeros(0)),
        }
    }

    /// `h(x)` at the primal part of `z` (empty when there are no equalities).
    pub fn equality_values(&self, z: &Vector) -> Result<Vector, ModelError> {
        let x = z.rows(0, self.np).into_owned();
        match &self.eq {
            Some(h) => h.value(&x),
            None => Ok(Vector::zeros(0)),
        }
    }

    fn eval(&self, z: &Vector, want_jacobian: bool) -> Result<(Vector, Option<Matrix>), ModelError> {
        crate::model::check_dim(self, z)?;
        let (np, m, q) = (self.np, self.m, self.q);
        let x = z.rows(0, np).into_owned();
        let lam = z.rows(np, m).into_owned();
        let mu = z.rows(np + m, q).into_owned();
        let n = np + m + q;

        let mut s = Vector::zeros(n);
        let mut jac = if want_jacobian { Some(Matrix::zeros(n, n)) } else { None };

        let f = self.field.value(&x)?;
        s.rows_mut(0, np).copy_from(&f);
        if let Some(j) = jac.as_mut() {
            j.view_mut((0, 0), (np, np)).copy_from(&self.field.jacobian(&x)?);
        }

        if let Some(g) = &self.ineq {
            let gv = g.value(&x)?;
            let gj = g.jacobian(&x)?;
            s.rows_mut(0, np).gemv_tr(1.0, &gj, &lam, 1.0);
            for i in 0..m {
                s[np + i] = fb_smooth(lam[i], -gv[i], self.eps);
            }
            if let Some(j) = jac.as_mut() {
                let mut xx = j.view_mut((0, 0), (np, np));
                xx += g.weighted_hessian(&x, &lam)?;
                j.view_mut((0, np), (np, m)).copy_from(&gj.transpose());
                for i in 0..m {
                    let (da, db) = fb_partials(lam[i], -gv[i], self.eps);
                    for c in 0..np {
                        j[(np + i, c)] = -db * gj[(i, c)];
                    }
                    j[(np + i, np + i)] = da;
                }
            }
        }

        if let Some(h) = &self.eq {
            let hv = h.value(&x)?;
            let hj = h.jacobian(&x)?;
            s.rows_mut(0, np).gemv_tr(1.0, &hj, &mu, 1.0);
            s.rows_mut(np + m, q).copy_from(&hv);
            if let Some(j) = jac.as_mut() {
                if h.affine_matrix().is_none() {
                    let mut xx = j.view_mut((0, 0), (np, np));
                    xx += h.weighted_hessian(&x, &mu)?;
                }
                j.view_mut((0, np + m), (np, q)).copy_from(&hj.transpose());
                j.view_mut((np + m, 0), (q, np)).copy_from(&hj);
            }
        }
        Ok((s, jac))
    }
}

impl StationarityModel for KktModel {
    fn layout(&self) -> &BlockLayout {
        &self.layout
    }

    fn info(&self) -> &ModelInfo {
        &self.info
    }

    fn residual(&self, z: &Vector) -> Result<Vector, ModelError> {
        Ok(self.eval(z, false)?.0)
    }

    fn jacobian(&self, z: &Vector) -> Result<Matrix, ModelError> {
        Ok(self.eval(z, true)?.1.expect("jacobian requested"))
    }

    fn residual_and_jacobian(&self, z: &Vector) -> Result<(Vector, Matrix), ModelError> {
        let (s, j) = self.eval(z, true)?;
        Ok((s, j.expect("jacobian requested")))
    }
}
