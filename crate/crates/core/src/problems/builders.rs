//! Benchmark problem builders.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::oracle::AffineVi;
use super::{BenchmarkSpec, CournotParams, EncodingKind, LawPresets, MinimaxVariant, ProblemError, ProblemKind};
use crate::encodings::{ConstrainedProblem, GneProblem, MinimaxEquality, MinimaxProblem, UnconstrainedProblem};
use crate::law::LawKind;
use crate::linalg::{min_sym_eigenvalue, Matrix, Vector};
use crate::maps::{AffineMap, FnMap};
use crate::model::ModelError;

/// Default Fischer–Burmeister smoothing.
pub const DEFAULT_EPS: f64 = 1e-6;
/// NUM rates at or below this are outside the utility's domain.
pub const NUM_X_MIN: f64 = 1e-9;

fn presets(pt_mu: f64, pt_horizon: f64) -> LawPresets {
    LawPresets {
        exp: LawKind::Exponential { c: 1.0 },
        ft: LawKind::FiniteTime { k: 1.0, gamma: 0.5 },
        fxt: LawKind::FixedTime {
            a: 1.0,
            b: 1.0,
            gamma: 0.5,
            delta: 1.5,
        },
        pt: LawKind::PrescribedTime {
            mu: pt_mu,
            horizon: pt_horizon,
        },
    }
}

/// `J(x) = log Σᵢ (e^{xᵢ} + e^{-xᵢ}) + ½‖x‖²`.
pub fn logsumexp_objective(x: &Vector) -> f64 {
    let m = x.amax();
    let z: f64 = x.iter().map(|&v| libm::exp(v - m) + libm::exp(-v - m)).sum();
    m + libm::log(z) + 0.5 * x.norm_squared()
}

/// `(p, q, Z)` with `pᵢ = 2 sinh xᵢ`, `qᵢ = 2 cosh xᵢ`, `Z = Σ qᵢ`, all
/// scaled by `e^{-max|x|}` so large entries do not overflow.
fn logsumexp_parts(x: &Vector) -> (Vector, Vector, f64) {
    let m = x.amax();
    let p = x.map(|v| libm::exp(v - m) - libm::exp(-v - m));
    let q = x.map(|v| libm::exp(v - m) + libm::exp(-v - m));
    let z = q.sum();
    (p, q, z)
}

/// Log-sum-exp plus quadratic in `ℝⁿ`: unique minimizer `0`, strongly
/// convex with constant 1.
pub fn build_logsumexp(n: usize) -> Result<(UnconstrainedProblem, BenchmarkSpec), ProblemError> {
    if n == 0 {
        return Err(ProblemError::InvalidParameter(
            "log-sum-exp dimension must be at least 1".into(),
        ));
    }
    let gradient = FnMap::new(
        n,
        n,
        |x: &Vector| {
            let (p, _, z) = logsumexp_parts(x);
            Ok(p / z + x)
        },
        move |x: &Vector| {
            let (p, q, z) = logsumexp_parts(x);
            let mut h = -(&p * p.transpose()) / (z * z);
            for i in 0..n {
                h[(i, i)] += q[i] / z + 1.0;
            }
            Ok(h)
        },
    );
    let spec = BenchmarkSpec {
        name: format!("logsumexp{n}"),
        problem: ProblemKind::Logsumexp { n },
        encoding: EncodingKind::Unconstrained,
        state_dim: n,
        eps: None,
        z0: vec![1.0; n],
        laws: presets(6.0, 5.0),
        gd_m: Some(1.0),
        solution: Some(vec![0.0; n]),
        notes: None,
    };
    let problem = UnconstrainedProblem {
        name: spec.name.clone(),
        gradient: Box::new(gradient),
        strong_convexity: Some(1.0),
    };
    Ok((problem, spec))
}

/// `J(x) = ½‖x‖²`.
pub fn build_quadratic(n: usize) -> Result<(UnconstrainedProblem, BenchmarkSpec), ProblemError> {
    if n == 0 {
        return Err(ProblemError::InvalidParameter(
            "quadratic dimension must be at least 1".into(),
        ));
    }
    let mut z0 = vec![0.0; n];
    z0[0] = 1.0;
    let spec = BenchmarkSpec {
        name: format!("quadratic{n}"),
        problem: ProblemKind::Quadratic { n },
        encoding: EncodingKind::Unconstrained,
        state_dim: n,
        eps: None,
        z0,
        laws: presets(6.0, 5.0),
        gd_m: Some(1.0),
        solution: Some(vec![0.0; n]),
        notes: None,
    };
    let problem = UnconstrainedProblem {
        name: spec.name.clone(),
        gradient: Box::new(AffineMap::new(Matrix::identity(n, n), Vector::zeros(n))?),
        strong_convexity: Some(1.0),
    };
    Ok((problem, spec))
}

fn bound_qp_vi(n: usize) -> AffineVi {
    let mut g = Matrix::zeros(1, n);
    g[(0, 0)] = -1.0;
    AffineVi {
        q: Matrix::identity(n, n),
        c: Vector::zeros(n),
        eq: None,
        ineq: Some((g, Vector::from_element(1, -1.0))),
    }
}

/// `min ½‖x‖²` subject to `x₁ ≥ 1`, written `g(x) = 1 - x₁ ≤ 0`.
/// Solution `x = (1, 0, …)`, `λ = 1`.
pub fn build_bound_qp(n: usize, eps: f64) -> Result<(ConstrainedProblem, BenchmarkSpec), ProblemError> {
    if n == 0 {
        return Err(ProblemError::InvalidParameter(
            "bound QP dimension must be at least 1".into(),
        ));
    }
    let vi = bound_qp_vi(n);
    let (g, h) = vi.ineq.clone().expect("bound constraint");
    let mut solution = vec![0.0; n + 1];
    solution[0] = 1.0;
    solution[n] = 1.0;
    let mut z0 = vec![0.0; n + 1];
    z0[n] = 0.5;
    let spec = BenchmarkSpec {
        name: format!("boundqp{n}"),
        problem: ProblemKind::BoundQp { n },
        encoding: EncodingKind::FbKkt,
        state_dim: n + 1,
        eps: Some(eps),
        z0,
        laws: presets(6.0, 5.0),
        gd_m: None,
        solution: Some(solution),
        notes: None,
    };
    let problem = ConstrainedProblem {
        name: spec.name.clone(),
        gradient: Box::new(AffineMap::new(vi.q.clone(), -vi.c.clone())?),
        ineq: Some(Box::new(AffineMap::new(g, h)?)),
        eq: None,
        eps,
    };
    Ok((problem, spec))
}

/// The bound QP as an affine problem for [`oracle_kkt_affine`](super::oracle_kkt_affine).
pub fn bound_qp_affine(n: usize) -> AffineVi {
    bound_qp_vi(n)
}

/// Network utility maximization `max Σ αⱼ log xⱼ` s.t. `Rx ≤ c`, in
/// minimization form with `g(x) = Rx - c`.
pub fn build_num(
    r: &Matrix,
    c: &Vector,
    alpha: &Vector,
    eps: f64,
) -> Result<(ConstrainedProblem, BenchmarkSpec), ProblemError> {
    let (links, sources) = r.shape();
    if links == 0 || sources == 0 {
        return Err(ProblemError::InvalidParameter("routing matrix is empty".into()));
    }
    if c.len() != links || alpha.len() != sources {
        return Err(ProblemError::InvalidParameter(format!(
            "routing matrix is {links}×{sources} but c has {} and alpha {} entries",
            c.len(),
            alpha.len()
        )));
    }
    if let Some(v) = r.iter().find(|&&v| v != 0.0 && v != 1.0) {
        return Err(ProblemError::InvalidParameter(format!(
            "routing entries must be 0 or 1, found {v}"
        )));
    }
    for j in 0..sources {
        if r.column(j).iter().all(|&v| v == 0.0) {
            return Err(ProblemError::InvalidParameter(format!("source {j} uses no link")));
        }
    }
    if c.iter().any(|&v| !(v > 0.0)) || alpha.iter().any(|&v| !(v > 0.0)) {
        return Err(ProblemError::InvalidParameter(
            "capacities and weights must be positive".into(),
        ));
    }
    let a_val = alpha.clone();
    let a_jac = alpha.clone();
    let gradient = FnMap::new(
        sources,
        sources,
        move |x: &Vector| {
            check_rates(x)?;
            Ok(-a_val.component_div(x))
        },
        move |x: &Vector| {
            check_rates(x)?;
            Ok(Matrix::from_diagonal(&a_jac.zip_map(x, |a, v| a / (v * v))))
        },
    );
    // start at half the fair share of the tightest link, λ = 1
    let share = c.min() / (2.0 * sources as f64);
    let mut z0 = vec![share; sources];
    z0.extend(core::iter::repeat_n(1.0, links));
    let solution = super::oracle::oracle_num(r, c, alpha)
        .ok()
        .map(|z| z.as_slice().to_vec());
    let spec = BenchmarkSpec {
        name: format!("num{sources}x{links}"),
        problem: ProblemKind::Num {
            routing: (0..links).map(|l| r.row(l).iter().copied().collect()).collect(),
            capacity: c.as_slice().to_vec(),
            weights: alpha.as_slice().to_vec(),
        },
        encoding: EncodingKind::FbKkt,
        state_dim: sources + links,
        eps: Some(eps),
        z0,
        laws: presets(8.0, 5.0),
        gd_m: None,
        solution,
        notes: Some("stand-in instance: two sources sharing one unit-capacity link".into()),
    };
    let problem = ConstrainedProblem {
        name: spec.name.clone(),
        gradient: Box::new(gradient),
        ineq: Some(Box::new(AffineMap::new(r.clone(), c.clone())?)),
        eq: None,
        eps,
    };
    Ok((problem, spec))
}

fn check_rates(x: &Vector) -> Result<(), ModelError> {
    match x.iter().position(|&v| !(v > NUM_X_MIN)) {
        Some(index) => Err(ModelError::DomainViolation {
            index,
            value: x[index],
            min: NUM_X_MIN,
        }),
        None => Ok(()),
    }
}

/// Default NUM instance: `R = [1 1]`, `c = 1`, `α = (1, 1)`.
pub fn build_num_default(eps: f64) -> Result<(ConstrainedProblem, BenchmarkSpec), ProblemError> {
    build_num(
        &Matrix::from_row_slice(1, 2, &[1.0, 1.0]),
        &Vector::from_element(1, 1.0),
        &Vector::from_element(2, 1.0),
        eps,
    )
}

impl Default for CournotParams {
    fn default() -> Self {
        Self {
            firms: 4,
            intercept: vec![10.0, 8.0],
            slope: vec![1.0, 1.0],
            target_market: 0,
            target_supply: 12.0,
            capacity: vec![20.0, 15.0],
        }
    }
}

impl CournotParams {
    fn markets(&self) -> usize {
        self.intercept.len()
    }

    fn validate(&self) -> Result<(), ProblemError> {
        let m = self.markets();
        if self.firms == 0 || m == 0 {
            return Err(ProblemError::InvalidParameter(
                "Cournot game needs firms and markets".into(),
            ));
        }
        if self.slope.len() != m || self.capacity.len() != m || self.target_market >= m {
            return Err(ProblemError::InvalidParameter(
                "Cournot market data have inconsistent lengths".into(),
            ));
        }
        if self.slope.iter().any(|&d| !(d >= 0.0)) {
            return Err(ProblemError::InvalidParameter(
                "inverse-demand slopes must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// Aggregation `C = [I I … I]`.
    fn aggregation(&self) -> Matrix {
        let m = self.markets();
        let mut c = Matrix::zeros(m, m * self.firms);
        for k in 0..self.firms {
            c.view_mut((0, k * m), (m, m)).fill_with_identity();
        }
        c
    }

    /// Constant pseudogradient Jacobian `I + DC ⊗ 1 + blockdiag(D)`, and
    /// the offset `-J̄` per firm, so `𝒢(x) = Qx + c`.
    fn pseudogradient(&self) -> (Matrix, Vector) {
        let m = self.markets();
        let n = m * self.firms;
        let d = Matrix::from_diagonal(&Vector::from_vec(self.slope.clone()));
        let dc = &d * self.aggregation();
        let mut q = Matrix::identity(n, n);
        let mut c = Vector::zeros(n);
        for k in 0..self.firms {
            let rows = k * m;
            let mut block = q.view_mut((rows, 0), (m, n));
            block += &dc;
            let mut diag = q.view_mut((rows, rows), (m, m));
            diag += &d;
            for i in 0..m {
                c[rows + i] = -self.intercept[i];
            }
        }
        (q, c)
    }

    /// Shared equality `e_tᵀ C x = target` and inequalities
    /// `Cx ≤ capacity`, `-x ≤ 0`.
    fn constraints(&self) -> ((Matrix, Vector), (Matrix, Vector)) {
        let m = self.markets();
        let n = m * self.firms;
        let c = self.aggregation();
        let a = c.rows(self.target_market, 1).into_owned();
        let b = Vector::from_element(1, self.target_supply);
        let mut g = Matrix::zeros(m + n, n);
        g.view_mut((0, 0), (m, n)).copy_from(&c);
        g.view_mut((m, 0), (n, n)).copy_from(&(-Matrix::identity(n, n)));
        let mut h = Vector::zeros(m + n);
        h.rows_mut(0, m).copy_from(&Vector::from_vec(self.capacity.clone()));
        ((a, b), (g, h))
    }

    /// The game as an affine problem for the active-set oracle.
    pub fn affine(&self) -> AffineVi {
        let (q, c) = self.pseudogradient();
        let (eq, ineq) = self.constraints();
        AffineVi {
            q,
            c,
            eq: Some(eq),
            ineq: Some(ineq),
        }
    }
}

/// Cournot game with `N` firms and `M` markets: firm `k` minimizes
/// `½‖x_k‖² - (J̄ - DCx)ᵀ x_k` under shared supply constraints.
pub fn build_cournot_with(params: &CournotParams, eps: f64) -> Result<(GneProblem, BenchmarkSpec), ProblemError> {
    params.validate()?;
    let vi = params.affine();
    let n = vi.dim();
    let (a, b) = vi.eq.clone().expect("equality");
    let (g, h) = vi.ineq.clone().expect("inequalities");
    let m_ineq = g.nrows();
    let monotonicity = min_sym_eigenvalue(&vi.q);
    if !(monotonicity > 0.0) {
        return Err(ProblemError::InvalidParameter(
            "pseudogradient Jacobian is not positive definite".into(),
        ));
    }
    let mut z0 = vec![1.0; n];
    z0.extend(core::iter::repeat_n(1.0, m_ineq));
    z0.push(0.0);
    let solution = super::oracle::oracle_active_set(&vi)
        .ok()
        .map(|z| z.as_slice().to_vec());
    let spec = BenchmarkSpec {
        name: format!("cournot{}x{}", params.firms, params.markets()),
        problem: ProblemKind::Cournot(params.clone()),
        encoding: EncodingKind::Gne,
        state_dim: n + m_ineq + 1,
        eps: Some(eps),
        z0,
        laws: presets(8.0, 5.0),
        gd_m: None,
        solution,
        notes: Some("initial state x = 1, λ = 1, μ = 0 is an artifact choice".into()),
    };
    let problem = GneProblem {
        name: spec.name.clone(),
        player_dims: vec![params.markets(); params.firms],
        pseudogradient: Box::new(AffineMap::new(vi.q.clone(), -vi.c.clone())?),
        eq: Some(AffineMap::new(a, b)?),
        ineq: Some(Box::new(AffineMap::new(g, h)?)),
        monotonicity: Some(monotonicity),
    };
    Ok((problem, spec))
}

/// The four-firm, two-market instance.
pub fn build_cournot(eps: f64) -> Result<(GneProblem, BenchmarkSpec), ProblemError> {
    build_cournot_with(&CournotParams::default(), eps)
}

/// `J(x, y) = ½x² - ½y² + xy` as an affine problem on the sign-flipped
/// field `(∇ₓJ, -∇ᵧJ) = (x + y, y - x)`.
pub fn minimax_toy_affine(variant: MinimaxVariant) -> AffineVi {
    let q = Matrix::from_row_slice(2, 2, &[1.0, 1.0, -1.0, 1.0]);
    match variant {
        MinimaxVariant::Inequality => AffineVi {
            q,
            c: Vector::zeros(2),
            eq: None,
            ineq: Some((Matrix::from_row_slice(1, 2, &[1.0, 1.0]), Vector::from_element(1, 1.0))),
        },
        MinimaxVariant::Equality => AffineVi {
            q,
            c: Vector::zeros(2),
            eq: Some((Matrix::from_row_slice(1, 2, &[1.0, 1.0]), Vector::from_element(1, 2.0))),
            ineq: None,
        },
    }
}

/// Scalar strongly convex–strongly concave saddle problem. The inequality
/// variant carries `x + y - 1 ≤ 0` (inactive at the saddle `(0, 0)`); the
/// equality variant imposes `x + y = 2` instead.
pub fn build_minimax_toy(variant: MinimaxVariant, eps: f64) -> Result<(MinimaxProblem, BenchmarkSpec), ProblemError> {
    let gradient = AffineMap::new(Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]), Vector::zeros(2))?;
    let (coupled_ineq, eq, z0, name): (Option<Box<dyn crate::maps::ConstraintMap>>, _, Vec<f64>, String) = match variant
    {
        MinimaxVariant::Inequality => (
            Some(Box::new(AffineMap::new(
                Matrix::from_row_slice(1, 2, &[1.0, 1.0]),
                Vector::from_element(1, 1.0),
            )?)),
            None,
            vec![1.0, -1.0, 0.5],
            "minimax-ineq".into(),
        ),
        MinimaxVariant::Equality => (
            None,
            Some(MinimaxEquality {
                a: Matrix::from_element(1, 1, 1.0),
                b_mat: Matrix::from_element(1, 1, 1.0),
                b: Vector::from_element(1, 2.0),
            }),
            vec![1.0, -1.0, 0.0],
            "minimax-eq".into(),
        ),
    };
    let solution = super::oracle::oracle_active_set(&minimax_toy_affine(variant))
        .ok()
        .map(|z| z.as_slice().to_vec());
    let spec = BenchmarkSpec {
        name: name.clone(),
        problem: ProblemKind::MinimaxToy { variant },
        encoding: EncodingKind::Minimax,
        state_dim: 3,
        eps: Some(eps),
        z0,
        laws: presets(8.0, 5.0),
        gd_m: None,
        solution,
        notes: None,
    };
    let problem = MinimaxProblem {
        name,
        n_x: 1,
        n_y: 1,
        gradient: Box::new(gradient),
        coupled_ineq,
        eq,
    };
    Ok((problem, spec))
}
