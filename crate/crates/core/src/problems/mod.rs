//! Benchmark problems and independent oracles.
//!
//! Every builder returns the problem definition together with a
//! [`BenchmarkSpec`]: a plain-data description (parameters, initial state,
//! recommended law parameters, known solution) that [`build_model`] turns
//! back into a [`StationarityModel`].

mod builders;
mod oracle;

pub use builders::{
    bound_qp_affine, build_bound_qp, build_cournot, build_cournot_with, build_logsumexp, build_minimax_toy, build_num,
    build_num_default, build_quadratic, logsumexp_objective, minimax_toy_affine, DEFAULT_EPS, NUM_X_MIN,
};
pub use oracle::{
    oracle_active_set, oracle_kkt_affine, oracle_num, AffineVi, OracleError, FEASIBILITY_SLACK, MAX_ENUMERATED,
};

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::encodings::{
    encode_constrained_exact, encode_constrained_fb, encode_gne, encode_minimax, encode_unconstrained,
    ConstrainedProblem, EncodingError, GneProblem, MinimaxProblem, UnconstrainedProblem,
};
use crate::law::{DecayLaw, LawError, LawKind};
use crate::linalg::{Matrix, Vector};
use crate::maps::{ConstraintMap, VectorMap};
use crate::model::{ModelError, StationarityModel};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("invalid problem parameter: {0}")]
    InvalidParameter(String),
    #[error("{problem} does not support the {encoding} encoding")]
    UnsupportedEncoding {
        problem: &'static str,
        encoding: &'static str,
    },
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EncodingKind {
    Unconstrained,
    /// Smoothed Fischer–Burmeister KKT system.
    FbKkt,
    /// Exact non-square KKT residual (HGD only).
    ExactKkt,
    Minimax,
    Gne,
}

impl EncodingKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EncodingKind::Unconstrained => "unconstrained",
            EncodingKind::FbKkt => "fb_kkt",
            EncodingKind::ExactKkt => "exact_kkt",
            EncodingKind::Minimax => "minimax",
            EncodingKind::Gne => "gne",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MinimaxVariant {
    /// Coupled inequality `x + y ≤ 1`, inactive at the saddle.
    Inequality,
    /// Equality `x + y = 2`.
    Equality,
}

/// Cournot market data: `N` firms, `M` markets, inverse demand
/// `J̄ - D·Cx` with `D = diag(slope)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CournotParams {
    pub firms: usize,
    pub intercept: Vec<f64>,
    pub slope: Vec<f64>,
    /// Market whose total supply is pinned by the shared equality.
    pub target_market: usize,
    pub target_supply: f64,
    pub capacity: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "snake_case"))]
pub enum ProblemKind {
    Logsumexp {
        n: usize,
    },
    Quadratic {
        n: usize,
    },
    BoundQp {
        n: usize,
    },
    Num {
        routing: Vec<Vec<f64>>,
        capacity: Vec<f64>,
        weights: Vec<f64>,
    },
    Cournot(CournotParams),
    MinimaxToy {
        variant: MinimaxVariant,
    },
}

impl ProblemKind {
    pub fn family(&self) -> &'static str {
        match self {
            ProblemKind::Logsumexp { .. } => "logsumexp",
            ProblemKind::Quadratic { .. } => "quadratic",
            ProblemKind::BoundQp { .. } => "boundqp",
            ProblemKind::Num { .. } => "num",
            ProblemKind::Cournot(_) => "cournot",
            ProblemKind::MinimaxToy { .. } => "minimax",
        }
    }
}

/// Recommended parameters for each of the four laws.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LawPresets {
    pub exp: LawKind,
    pub ft: LawKind,
    pub fxt: LawKind,
    pub pt: LawKind,
}

impl LawPresets {
    /// Exp, FT, FxT, PT in that order.
    pub fn all(&self) -> Result<[DecayLaw; 4], LawError> {
        Ok([
            DecayLaw::new(self.exp)?,
            DecayLaw::new(self.ft)?,
            DecayLaw::new(self.fxt)?,
            DecayLaw::new(self.pt)?,
        ])
    }

    /// Looks up a preset by tag (`exp`, `ft`, `fxt`, `pt`).
    pub fn get(&self, tag: &str) -> Option<LawKind> {
        match tag {
            "exp" => Some(self.exp),
            "ft" => Some(self.ft),
            "fxt" => Some(self.fxt),
            "pt" => Some(self.pt),
            _ => None,
        }
    }
}

/// Plain-data description of a benchmark run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BenchmarkSpec {
    pub name: String,
    pub problem: ProblemKind,
    pub encoding: EncodingKind,
    pub state_dim: usize,
    /// Fischer–Burmeister smoothing for KKT encodings.
    pub eps: Option<f64>,
    pub z0: Vec<f64>,
    pub laws: LawPresets,
    /// Monotonicity constant for gradient dynamics, when it applies.
    pub gd_m: Option<f64>,
    /// Reference solution `z*` from a closed form or an oracle.
    pub solution: Option<Vec<f64>>,
    pub notes: Option<String>,
}

impl BenchmarkSpec {
    pub fn z0_vector(&self) -> Vector {
        Vector::from_vec(self.z0.clone())
    }

    pub fn solution_vector(&self) -> Option<Vector> {
        self.solution.as_ref().map(|s| Vector::from_vec(s.clone()))
    }
}

fn unsupported(problem: &ProblemKind, encoding: EncodingKind) -> ProblemError {
    ProblemError::UnsupportedEncoding {
        problem: problem.family(),
        encoding: encoding.as_str(),
    }
}

/// A problem definition rebuilt from a spec, before encoding.
enum Built {
    Unconstrained(UnconstrainedProblem),
    Constrained(ConstrainedProblem, EncodingKind),
    Gne(GneProblem),
    Minimax(MinimaxProblem),
}

fn build_problem(spec: &BenchmarkSpec) -> Result<Built, ProblemError> {
    let eps = spec.eps.unwrap_or(DEFAULT_EPS);
    Ok(match (&spec.problem, spec.encoding) {
        (ProblemKind::Logsumexp { n }, EncodingKind::Unconstrained) => Built::Unconstrained(build_logsumexp(*n)?.0),
        (ProblemKind::Quadratic { n }, EncodingKind::Unconstrained) => Built::Unconstrained(build_quadratic(*n)?.0),
        (ProblemKind::BoundQp { n }, enc @ (EncodingKind::FbKkt | EncodingKind::ExactKkt)) => {
            Built::Constrained(build_bound_qp(*n, eps)?.0, enc)
        }
        (
            ProblemKind::Num {
                routing,
                capacity,
                weights,
            },
            enc @ (EncodingKind::FbKkt | EncodingKind::ExactKkt),
        ) => {
            let links = routing.len();
            let sources = routing.first().map_or(0, |r| r.len());
            if routing.iter().any(|r| r.len() != sources) {
                return Err(ProblemError::InvalidParameter("routing rows differ in length".into()));
            }
            let flat: Vec<f64> = routing.iter().flatten().copied().collect();
            let (p, _) = build_num(
                &Matrix::from_row_slice(links, sources, &flat),
                &Vector::from_vec(capacity.clone()),
                &Vector::from_vec(weights.clone()),
                eps,
            )?;
            Built::Constrained(p, enc)
        }
        (ProblemKind::Cournot(params), EncodingKind::Gne) => Built::Gne(build_cournot_with(params, eps)?.0),
        (ProblemKind::MinimaxToy { variant }, EncodingKind::Minimax) => {
            Built::Minimax(build_minimax_toy(*variant, eps)?.0)
        }
        (p, e) => return Err(unsupported(p, e)),
    })
}

/// Rebuilds the stationarity model a spec describes.
pub fn build_model(spec: &BenchmarkSpec) -> Result<Box<dyn StationarityModel>, ProblemError> {
    let eps = spec.eps.unwrap_or(DEFAULT_EPS);
    let model: Box<dyn StationarityModel> = match build_problem(spec)? {
        Built::Unconstrained(p) => Box::new(encode_unconstrained(p)?),
        Built::Constrained(p, EncodingKind::ExactKkt) => Box::new(encode_constrained_exact(p)?),
        Built::Constrained(p, _) => Box::new(encode_constrained_fb(p)?),
        Built::Gne(p) => Box::new(encode_gne(p, eps)?),
        Built::Minimax(p) => Box::new(encode_minimax(p, eps)?),
    };
    if model.dim() != spec.state_dim || spec.z0.len() != spec.state_dim {
        return Err(ProblemError::InvalidParameter(alloc::format!(
            "spec declares state dimension {} with {} initial values, model has {}",
            spec.state_dim,
            spec.z0.len(),
            model.dim()
        )));
    }
    Ok(model)
}

/// Worst primal constraint violations at a state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Feasibility {
    /// `max(0, maxᵢ gᵢ(x))`.
    pub inequality: f64,
    /// `maxⱼ |hⱼ(x)|`.
    pub equality: f64,
}

fn positive_part_max(g: &Vector) -> f64 {
    g.iter().fold(0.0_f64, |m, &v| m.max(v))
}

/// Evaluates the original constraints of the problem a spec describes at
/// the primal part of `z` (the leading block of the state).
pub fn primal_feasibility(spec: &BenchmarkSpec, z: &Vector) -> Result<Feasibility, ProblemError> {
    if z.len() != spec.state_dim {
        return Err(ProblemError::InvalidParameter(alloc::format!(
            "state has {} entries, spec declares {}",
            z.len(),
            spec.state_dim
        )));
    }
    let eval = |map: Option<&dyn ConstraintMap>, x: &Vector| -> Result<Vector, ProblemError> {
        match map {
            Some(g) => Ok(g.value(x)?),
            None => Ok(Vector::zeros(0)),
        }
    };
    let (g, h) = match build_problem(spec)? {
        Built::Unconstrained(_) => (Vector::zeros(0), Vector::zeros(0)),
        Built::Constrained(p, _) => {
            let x = z.rows(0, p.gradient.input_dim()).into_owned();
            (eval(p.ineq.as_deref(), &x)?, eval(p.eq.as_deref(), &x)?)
        }
        Built::Gne(p) => {
            let x = z.rows(0, p.player_dims.iter().sum()).into_owned();
            let h = match &p.eq {
                Some(a) => a.value(&x)?,
                None => Vector::zeros(0),
            };
            (eval(p.ineq.as_deref(), &x)?, h)
        }
        Built::Minimax(p) => {
            let w = z.rows(0, p.n_x + p.n_y).into_owned();
            let h = match &p.eq {
                Some(e) => &e.a * w.rows(0, p.n_x) + &e.b_mat * w.rows(p.n_x, p.n_y) - &e.b,
                None => Vector::zeros(0),
            };
            (eval(p.coupled_ineq.as_deref(), &w)?, h)
        }
    };
    Ok(Feasibility {
        inequality: positive_part_max(&g),
        equality: h.amax(),
    })
}

/// Looks up a shipped benchmark by name: `logsumexp` (n = 50), `quadratic`,
/// `boundqp`, `boundqp-exact`, `num`, `cournot`, `minimax-ineq`,
/// `minimax-eq`.
pub fn builtin(name: &str) -> Option<BenchmarkSpec> {
    let spec = match name {
        "logsumexp" => build_logsumexp(50).ok()?.1,
        "quadratic" => build_quadratic(2).ok()?.1,
        "boundqp" => build_bound_qp(3, DEFAULT_EPS).ok()?.1,
        "boundqp-exact" => {
            let mut s = build_bound_qp(3, DEFAULT_EPS).ok()?.1;
            s.name = "boundqp3-exact".into();
            s.encoding = EncodingKind::ExactKkt;
            s
        }
        "num" => build_num_default(DEFAULT_EPS).ok()?.1,
        "cournot" => build_cournot(DEFAULT_EPS).ok()?.1,
        "minimax-ineq" => build_minimax_toy(MinimaxVariant::Inequality, DEFAULT_EPS).ok()?.1,
        "minimax-eq" => build_minimax_toy(MinimaxVariant::Equality, DEFAULT_EPS).ok()?.1,
        _ => return None,
    };
    Some(spec)
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 8] = [
    "logsumexp",
    "quadratic",
    "boundqp",
    "boundqp-exact",
    "num",
    "cournot",
    "minimax-ineq",
    "minimax-eq",
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::min_sym_eigenvalue;
    use crate::model::{fd_check, olf_value};
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn logsumexp_values() {
        let (p, spec) = build_logsumexp(50).unwrap();
        let zero = Vector::zeros(50);
        assert!((logsumexp_objective(&zero) - libm::log(100.0)).abs() < 1e-14);
        assert_eq!(p.gradient.value(&zero).unwrap(), zero);
        let ones = Vector::from_element(50, 1.0);
        let g = p.gradient.value(&ones).unwrap();
        let expect = 1.0 + libm::tanh(1.0) / 50.0;
        assert!(g.iter().all(|v| (v - expect).abs() < 1e-14));
        let model = encode_unconstrained(p).unwrap();
        assert!(fd_check(&model, &ones, None).unwrap() <= 1e-5);
        assert_eq!(spec.z0, vec![1.0; 50]);
        // V(ones) = ½ · 50 · (1 + tanh(1)/50)²
        let v0 = olf_value(&model, &ones).unwrap();
        assert!((v0 - 25.0 * expect * expect).abs() < 1e-12);
    }

    #[test]
    fn logsumexp_gradient_matches_objective_differences() {
        let (p, _) = build_logsumexp(4).unwrap();
        let x = Vector::from_vec(vec![0.3, -1.2, 2.0, 0.0]);
        let g = p.gradient.value(&x).unwrap();
        for i in 0..4 {
            let h = 1e-6;
            let mut xp = x.clone();
            xp[i] += h;
            let mut xm = x.clone();
            xm[i] -= h;
            let fd = (logsumexp_objective(&xp) - logsumexp_objective(&xm)) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn num_validation() {
        let r = Matrix::from_row_slice(1, 2, &[1.0, 2.0]);
        assert!(build_num(&r, &Vector::from_element(1, 1.0), &Vector::from_element(2, 1.0), 1e-6).is_err());
        let r = Matrix::from_row_slice(1, 2, &[1.0, 0.0]);
        assert!(build_num(&r, &Vector::from_element(1, 1.0), &Vector::from_element(2, 1.0), 1e-6).is_err());
        let (_, spec) = build_num_default(1e-6).unwrap();
        assert_eq!(spec.solution, Some(vec![0.5, 0.5, 2.0]));
    }

    #[test]
    fn num_rejects_nonpositive_rates() {
        let (p, _) = build_num_default(1e-6).unwrap();
        let model = encode_constrained_fb(p).unwrap();
        let z = Vector::from_vec(vec![0.5, 0.0, 1.0]);
        assert!(matches!(
            model.residual(&z),
            Err(ModelError::DomainViolation { index: 1, .. })
        ));
    }

    #[test]
    fn cournot_structure() {
        let params = CournotParams::default();
        let vi = params.affine();
        // ∇𝒢 = 2I₈ + (11ᵀ ⊗ I₂): eigenvalues 2 and 6
        for i in 0..8 {
            for j in 0..8 {
                let expect = if i == j {
                    3.0
                } else if i % 2 == j % 2 {
                    1.0
                } else {
                    0.0
                };
                assert_eq!(vi.q[(i, j)], expect);
            }
        }
        assert!((min_sym_eigenvalue(&vi.q) - 2.0).abs() < 1e-12);
        assert_eq!(vi.inequality_count(), 10);
        let z = oracle_active_set(&vi).unwrap();
        for k in 0..4 {
            assert!((z[2 * k] - 3.0).abs() < 1e-10);
            assert!((z[2 * k + 1] - 4.0 / 3.0).abs() < 1e-10);
        }
        assert!(z.rows(8, 10).iter().all(|l| l.abs() < 1e-10));
        assert!((z[18] + 8.0).abs() < 1e-10);
    }

    #[test]
    fn cournot_model_is_affine_and_strongly_monotone() {
        let (p, spec) = build_cournot(1e-6).unwrap();
        assert!((p.monotonicity.unwrap() - 2.0).abs() < 1e-12);
        // the pseudogradient alone is affine, so differences are exact
        let field = encode_unconstrained(crate::encodings::UnconstrainedProblem {
            name: "pseudogradient".into(),
            gradient: p.pseudogradient,
            strong_convexity: None,
        })
        .unwrap();
        let model = build_model(&spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let z = Vector::from_fn(19, |_, _| rng.random_range(-2.0..2.0));
            let j = model.jacobian(&z).unwrap();
            let block = j.view((0, 0), (8, 8)).into_owned();
            assert!(min_sym_eigenvalue(&block) > 0.0);
            assert!(fd_check(&field, &z.rows(0, 8).into_owned(), None).unwrap() <= 1e-9);
            assert!(fd_check(&model, &z, None).unwrap() <= 1e-5);
        }
    }

    #[test]
    fn minimax_oracles() {
        let z = oracle_active_set(&minimax_toy_affine(MinimaxVariant::Inequality)).unwrap();
        assert!(z.amax() < 1e-14);
        let z = oracle_active_set(&minimax_toy_affine(MinimaxVariant::Equality)).unwrap();
        let expect = [0.0, 2.0, -2.0];
        for i in 0..3 {
            assert!((z[i] - expect[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn every_builtin_builds_and_matches_its_dimension() {
        for name in BUILTIN_NAMES {
            let spec = builtin(name).unwrap();
            let model = build_model(&spec).unwrap();
            assert_eq!(model.dim(), spec.z0.len(), "{name}");
            assert!(spec.laws.all().is_ok());
            if let Some(s) = spec.solution_vector() {
                // reference solutions are stationary up to the smoothing
                let r = model.residual(&s).unwrap();
                assert!(r.amax() <= 2e-6, "{name}: {}", r.amax());
            }
        }
        assert!(builtin("nope").is_none());
    }

    #[test]
    fn unsupported_pairing() {
        let mut spec = builtin("logsumexp").unwrap();
        spec.encoding = EncodingKind::Gne;
        assert!(matches!(
            build_model(&spec),
            Err(ProblemError::UnsupportedEncoding { .. })
        ));
    }

    #[test]
    fn feasibility_at_reference_solutions() {
        for name in BUILTIN_NAMES {
            let spec = builtin(name).unwrap();
            if let Some(sol) = spec.solution_vector() {
                let f = primal_feasibility(&spec, &sol).unwrap();
                assert!(f.inequality <= 1e-9 && f.equality <= 1e-12, "{name}: {f:?}");
            }
        }
        // x₁ ≥ 1 is violated by 1 at the origin
        let spec = builtin("boundqp").unwrap();
        let f = primal_feasibility(&spec, &spec.z0_vector()).unwrap();
        assert_eq!(f.inequality, 1.0);
        assert_eq!(f.equality, 0.0);
        assert!(primal_feasibility(&spec, &Vector::zeros(2)).is_err());
    }

    #[test]
    fn bilinear_saddle_with_equality_has_a_singular_kkt_system() {
        // J = xy with x + y = 2: rows y + μ = 0 and -x + μ = 0 force x + y = 0
        let vi = AffineVi {
            q: Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
            c: Vector::zeros(2),
            eq: Some((Matrix::from_row_slice(1, 2, &[1.0, 1.0]), Vector::from_element(1, 2.0))),
            ineq: None,
        };
        assert_eq!(oracle_kkt_affine(&vi, &[]), Err(OracleError::OracleFailure));
    }
}
