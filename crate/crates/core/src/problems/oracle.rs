//! Direct-solve and enumeration oracles for affine problems.
//!
//! These never iterate: each answer comes from one dense factorization per
//! candidate active set, so they can serve as ground truth for the flows.

use alloc::vec::Vec;

use crate::linalg::{lu_solve, Matrix, Vector};

/// Relative pivot threshold for the oracle's linear solves.
const PIVOT_TOL: f64 = 1e-12;
/// Slack allowed on `g ≤ 0` and `λ ≥ 0` when filtering candidates.
pub const FEASIBILITY_SLACK: f64 = 1e-9;
/// Largest number of inequalities [`oracle_active_set`] will enumerate.
pub const MAX_ENUMERATED: usize = 16;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("KKT system is singular for this active set")]
    OracleFailure,
    #[error("active-set enumeration left {survivors} candidates, expected exactly one")]
    OracleAmbiguous { survivors: usize },
    #[error("{0} inequalities exceed the enumeration limit")]
    TooManyInequalities(usize),
    #[error("inconsistent oracle data: {0}")]
    Inconsistent(&'static str),
}

/// Affine variational problem: find `x` with
/// `Qx + c + Gᵀλ + Aᵀμ = 0`, `Ax = b`, `Gx ≤ h`, `λ ≥ 0`, `λᵀ(Gx - h) = 0`.
///
/// Covers quadratic programs (`Q` the Hessian), affine games (`Q` the
/// pseudogradient Jacobian) and sign-flipped minimax fields.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineVi {
    pub q: Matrix,
    pub c: Vector,
    /// `(A, b)` for `Ax = b`.
    pub eq: Option<(Matrix, Vector)>,
    /// `(G, h)` for `Gx ≤ h`.
    pub ineq: Option<(Matrix, Vector)>,
}

impl AffineVi {
    pub fn dim(&self) -> usize {
        self.q.ncols()
    }

    pub fn inequality_count(&self) -> usize {
        self.ineq.as_ref().map_or(0, |(g, _)| g.nrows())
    }

    pub fn equality_count(&self) -> usize {
        self.eq.as_ref().map_or(0, |(a, _)| a.nrows())
    }

    fn check(&self) -> Result<(), OracleError> {
        let n = self.dim();
        if self.q.nrows() != n || self.c.len() != n {
            return Err(OracleError::Inconsistent("Q must be square and match c"));
        }
        if let Some((a, b)) = &self.eq {
            if a.ncols() != n || a.nrows() != b.len() {
                return Err(OracleError::Inconsistent("equality block shape"));
            }
        }
        if let Some((g, h)) = &self.ineq {
            if g.ncols() != n || g.nrows() != h.len() {
                return Err(OracleError::Inconsistent("inequality block shape"));
            }
        }
        Ok(())
    }

    /// `Gx - h` (empty without inequalities).
    pub fn slack(&self, x: &Vector) -> Vector {
        match &self.ineq {
            Some((g, h)) => g * x - h,
            None => Vector::zeros(0),
        }
    }
}

/// Solves the KKT system with the inequalities in `active` held as
/// equalities and the rest dropped (their multipliers set to 0).
///
/// Returns `z = (x, λ, μ)` in the layout used by the KKT encodings.
pub fn oracle_kkt_affine(vi: &AffineVi, active: &[usize]) -> Result<Vector, OracleError> {
    vi.check()?;
    let n = vi.dim();
    let m = vi.inequality_count();
    let q = vi.equality_count();
    if active.iter().any(|&i| i >= m) {
        return Err(OracleError::Inconsistent("active index out of range"));
    }
    let k = active.len();
    let size = n + q + k;
    let mut lhs = Matrix::zeros(size, size);
    let mut rhs = Vector::zeros(size);
    lhs.view_mut((0, 0), (n, n)).copy_from(&vi.q);
    rhs.rows_mut(0, n).copy_from(&(-&vi.c));
    if let Some((a, b)) = &vi.eq {
        lhs.view_mut((0, n), (n, q)).copy_from(&a.transpose());
        lhs.view_mut((n, 0), (q, n)).copy_from(a);
        rhs.rows_mut(n, q).copy_from(b);
    }
    if let Some((g, h)) = &vi.ineq {
        for (r, &i) in active.iter().enumerate() {
            for j in 0..n {
                lhs[(j, n + q + r)] = g[(i, j)];
                lhs[(n + q + r, j)] = g[(i, j)];
            }
            rhs[n + q + r] = h[i];
        }
    }
    let sol = lu_solve(&lhs, &rhs, PIVOT_TOL).ok_or(OracleError::OracleFailure)?;
    let mut z = Vector::zeros(n + m + q);
    z.rows_mut(0, n).copy_from(&sol.rows(0, n));
    for (r, &i) in active.iter().enumerate() {
        z[n + i] = sol[n + q + r];
    }
    z.rows_mut(n + m, q).copy_from(&sol.rows(n, q));
    Ok(z)
}

/// Enumerates all `2^m` active sets and returns the unique KKT point that
/// is primal feasible and has nonnegative multipliers.
pub fn oracle_active_set(vi: &AffineVi) -> Result<Vector, OracleError> {
    vi.check()?;
    let n = vi.dim();
    let m = vi.inequality_count();
    if m > MAX_ENUMERATED {
        return Err(OracleError::TooManyInequalities(m));
    }
    let mut survivors: Vec<Vector> = Vec::new();
    let mut active = Vec::with_capacity(m);
    for mask in 0u32..(1u32 << m) {
        active.clear();
        active.extend((0..m).filter(|i| mask & (1 << i) != 0));
        let z = match oracle_kkt_affine(vi, &active) {
            Ok(z) => z,
            Err(OracleError::OracleFailure) => continue,
            Err(e) => return Err(e),
        };
        let x = z.rows(0, n).into_owned();
        let feasible = vi.slack(&x).iter().all(|&s| s <= FEASIBILITY_SLACK);
        let signed = z.rows(n, m).iter().all(|&l| l >= -FEASIBILITY_SLACK);
        if !(feasible && signed) {
            continue;
        }
        // degenerate constraints can be "active" with λ = 0 in several sets
        let dup = survivors.iter().any(|s| (s - &z).amax() <= 1e-8 * (1.0 + z.amax()));
        if !dup {
            survivors.push(z);
        }
    }
    match survivors.len() {
        1 => Ok(survivors.pop().expect("one survivor")),
        k => Err(OracleError::OracleAmbiguous { survivors: k }),
    }
}

/// Closed-form network-utility optimum when a single link carries every
/// source and is the only binding one: `λ = Σα / c_l`, `xⱼ = αⱼ / λ`.
///
/// Returns `z = (x, λ)`. Instances where no link carries every source have
/// no closed form here and give [`OracleError::OracleFailure`]; if such a
/// link exists but no candidate is feasible with `x > 0`, the result is
/// `OracleAmbiguous` with zero survivors.
pub fn oracle_num(r: &Matrix, c: &Vector, alpha: &Vector) -> Result<Vector, OracleError> {
    let (links, sources) = r.shape();
    if c.len() != links || alpha.len() != sources {
        return Err(OracleError::Inconsistent("NUM dimensions"));
    }
    let mut survivors: Vec<Vector> = Vec::new();
    let mut candidates = 0;
    for l in 0..links {
        if (0..sources).any(|j| r[(l, j)] == 0.0) {
            continue;
        }
        candidates += 1;
        let lam = alpha.sum() / c[l];
        let x = alpha / lam;
        let load = r * &x - c;
        if !(lam > 0.0) || x.iter().any(|&v| !(v > 0.0)) || load.iter().any(|&s| s > FEASIBILITY_SLACK) {
            continue;
        }
        let mut z = Vector::zeros(sources + links);
        z.rows_mut(0, sources).copy_from(&x);
        z[sources + l] = lam;
        if !survivors.iter().any(|s| (s - &z).amax() <= 1e-12) {
            survivors.push(z);
        }
    }
    match survivors.len() {
        1 => Ok(survivors.pop().expect("one survivor")),
        0 if candidates == 0 => Err(OracleError::OracleFailure),
        k => Err(OracleError::OracleAmbiguous { survivors: k }),
    }
}
