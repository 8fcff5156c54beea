//! Dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Euclidean norm.
#[inline]
pub fn norm(v: &Vector) -> f64 {
    v.norm()
}

/// Largest absolute entry, 0 for an empty vector.
pub fn norm_inf(v: &Vector) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Solves `a · x = b` by LU with partial pivoting. Returns `None` when the
/// factorization has a pivot below `pivot_tol` relative to the largest pivot.
pub fn lu_solve(a: &Matrix, b: &Vector, pivot_tol: f64) -> Option<Vector> {
    if !a.is_square() || a.nrows() != b.len() {
        return None;
    }
    let lu = a.clone().lu();
    let u = lu.u();
    let mut max_pivot: f64 = 0.0;
    let mut min_pivot = f64::INFINITY;
    for i in 0..u.nrows() {
        let p = u[(i, i)].abs();
        max_pivot = max_pivot.max(p);
        min_pivot = min_pivot.min(p);
    }
    if !(max_pivot > 0.0) || min_pivot <= pivot_tol * max_pivot {
        return None;
    }
    let x = lu.solve(b)?;
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// Numerical rank from the singular values, with threshold
/// `max(rows, cols) · σ_max · f64::EPSILON · 10`.
pub fn rank(a: &Matrix) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.clone().singular_values();
    let smax = sv.iter().fold(0.0_f64, |m, s| m.max(*s));
    if smax == 0.0 {
        return 0;
    }
    let tol = (a.nrows().max(a.ncols()) as f64) * smax * f64::EPSILON * 10.0;
    sv.iter().filter(|s| **s > tol).count()
}

/// Smallest eigenvalue of `(a + aᵀ) / 2`.
pub fn min_sym_eigenvalue(a: &Matrix) -> f64 {
    let sym = (a + a.transpose()) * 0.5;
    sym.symmetric_eigenvalues().iter().fold(f64::INFINITY, |m, v| m.min(*v))
}
