use alloc::boxed::Box;
use alloc::string::String;

use super::kkt::{constraint_rows, KktModel, KktParts};
use super::{expect_dim, expect_full_row_rank, EncodingError};
use crate::linalg::{Matrix, Vector};
use crate::maps::{ConstraintMap, VectorMap};
use crate::model::{BlockLayout, ModelError, ModelInfo, ResidualRole, StateRole, StationarityModel};

/// `min J(x)` subject to `g(x) ≤ 0`, `h(x) = 0`.
pub struct ConstrainedProblem {
    pub name: String,
    /// `∇J` with Jacobian `∇²J`.
    pub gradient: Box<dyn VectorMap>,
    pub ineq: Option<Box<dyn ConstraintMap>>,
    pub eq: Option<Box<dyn ConstraintMap>>,
    /// Fischer–Burmeister smoothing; ignored by the exact encoding.
    pub eps: f64,
}

fn validate(p: &ConstrainedProblem) -> Result<usize, EncodingError> {
    let n = p.gradient.input_dim();
    expect_dim("gradient output", n, p.gradient.output_dim())?;
    constraint_rows("inequality map input", p.ineq.as_deref(), n)?;
    constraint_rows("equality map input", p.eq.as_deref(), n)?;
    if let Some(a) = p.eq.as_ref().and_then(|h| h.affine_matrix()) {
        expect_full_row_rank("equality matrix", a)?;
    }
    Ok(n)
}

/// Smoothed-FB encoding on `z = (x, λ, μ)`.
pub fn encode_constrained_fb(p: ConstrainedProblem) -> Result<KktModel, EncodingError> {
    let n = validate(&p)?;
    KktModel::new(
        KktParts {
            field: p.gradient,
            ineq: p.ineq,
            eq: p.eq,
            eps: p.eps,
        },
        &[(StateRole::PrimalX, n)],
        ModelInfo {
            name: p.name,
            ..ModelInfo::default()
        },
    )
}

/// Exact (unsmoothed) encoding on `z = (x, λ, μ)`:
///
/// ```text
/// S(z) = ( ∇ₓL,  λᵀg(x),  max(g(x), 0),  max(-λ, 0),  h(x) )
/// ```
///
/// `S` has `n + 1 + 2m + q` rows for `n + m + q` states, so only the
/// Hessian-gradient realization can use it. `V = ½‖S‖²` is C¹; the
/// Jacobian uses derivative 0 on the flat side of each `max` kink.
pub struct ExactKktModel {
    gradient: Box<dyn VectorMap>,
    ineq: Option<Box<dyn ConstraintMap>>,
    eq: Option<Box<dyn ConstraintMap>>,
    n: usize,
    m: usize,
    q: usize,
    layout: BlockLayout,
    info: ModelInfo,
}

pub fn encode_constrained_exact(p: ConstrainedProblem) -> Result<ExactKktModel, EncodingError> {
    let n = validate(&p)?;
    let m = p.ineq.as_ref().map_or(0, |g| g.output_dim());
    let q = p.eq.as_ref().map_or(0, |h| h.output_dim());
    let comp = usize::from(m > 0);
    let layout = BlockLayout::new(
        &[
            (StateRole::PrimalX, n),
            (StateRole::IneqMultiplier, m),
            (StateRole::EqMultiplier, q),
        ],
        &[
            (ResidualRole::Stationarity, n),
            (ResidualRole::Inequality, comp + 2 * m),
            (ResidualRole::Equality, q),
        ],
    )
    .map_err(|_| EncodingError::DimensionMismatch {
        what: "objective dimension",
        expected: 1,
        got: 0,
    })?;
    Ok(ExactKktModel {
        gradient: p.gradient,
        ineq: p.ineq,
        eq: p.eq,
        n,
        m,
        q,
        layout,
        info: ModelInfo {
            name: p.name,
            ..ModelInfo::default()
        },
    })
}

impl ExactKktModel {
    fn eval(&self, z: &Vector, want_jacobian: bool) -> Result<(Vector, Option<Matrix>), ModelError> {
        crate::model::check_dim(self, z)?;
        let (n, m, q) = (self.n, self.m, self.q);
        let x = z.rows(0, n).into_owned();
        let lam = z.rows(n, m).into_owned();
        let mu = z.rows(n + m, q).into_owned();
        let comp = usize::from(m > 0);
        let rows = n + comp + 2 * m + q;
        let cols = n + m + q;
        let mut s = Vector::zeros(rows);
        let mut jac = if want_jacobian {
            Some(Matrix::zeros(rows, cols))
        } else {
            None
        };

        s.rows_mut(0, n).copy_from(&self.gradient.value(&x)?);
        if let Some(j) = jac.as_mut() {
            j.view_mut((0, 0), (n, n)).copy_from(&self.gradient.jacobian(&x)?);
        }

        if let Some(g) = &self.ineq {
            let gv = g.value(&x)?;
            let gj = g.jacobian(&x)?;
            s.rows_mut(0, n).gemv_tr(1.0, &gj, &lam, 1.0);
            // rows: [n] = λᵀg, [n+1 ..= n+m] = g₊, [n+1+m ..] = λ₋
            s[n] = lam.dot(&gv);
            for i in 0..m {
                s[n + 1 + i] = gv[i].max(0.0);
                s[n + 1 + m + i] = (-lam[i]).max(0.0);
            }
            if let Some(j) = jac.as_mut() {
                let mut xx = j.view_mut((0, 0), (n, n));
                xx += g.weighted_hessian(&x, &lam)?;
                j.view_mut((0, n), (n, m)).copy_from(&gj.transpose());
                let lam_g = gj.tr_mul(&lam);
                for c in 0..n {
                    j[(n, c)] = lam_g[c];
                }
                for i in 0..m {
                    j[(n, n + i)] = gv[i];
                    if gv[i] > 0.0 {
                        for c in 0..n {
                            j[(n + 1 + i, c)] = gj[(i, c)];
                        }
                    }
                    if lam[i] < 0.0 {
                        j[(n + 1 + m + i, n + i)] = -1.0;
                    }
                }
            }
        }

        if let Some(h) = &self.eq {
            let hv = h.value(&x)?;
            let hj = h.jacobian(&x)?;
            s.rows_mut(0, n).gemv_tr(1.0, &hj, &mu, 1.0);
            let r0 = n + comp + 2 * m;
            s.rows_mut(r0, q).copy_from(&hv);
            if let Some(j) = jac.as_mut() {
                if h.affine_matrix().is_none() {
                    let mut xx = j.view_mut((0, 0), (n, n));
                    xx += h.weighted_hessian(&x, &mu)?;
                }
                j.view_mut((0, n + m), (n, q)).copy_from(&hj.transpose());
                j.view_mut((r0, 0), (q, n)).copy_from(&hj);
            }
        }
        Ok((s, jac))
    }
}

impl StationarityModel for ExactKktModel {
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
