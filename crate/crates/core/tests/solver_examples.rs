use olfkit::dynamics::Realization;
use olfkit::encodings::{encode_constrained_exact, encode_constrained_fb, encode_unconstrained, UnconstrainedProblem};
use olfkit::integrate::{solve, verify_decay, verify_decay_against, SolveConfig, Status};
use olfkit::law::DecayLaw;
use olfkit::linalg::{Matrix, Vector};
use olfkit::maps::AffineMap;
use olfkit::model::{block_residuals, StationarityModel};
use olfkit::problems;
use olfkit::problems::{build_bound_qp, build_logsumexp, build_num_default, build_quadratic, BUILTIN_NAMES};

fn logsumexp() -> (olfkit::encodings::UnconstrainedModel, Vector) {
    let (p, spec) = build_logsumexp(50).unwrap();
    (encode_unconstrained(p).unwrap(), spec.z0_vector())
}

#[test]
fn hgd_exponential_decay_is_exact_on_logsumexp() {
    let (model, z0) = logsumexp();
    let law = DecayLaw::exponential(1.0).unwrap();
    let cfg = SolveConfig::new(law, Realization::hgd());
    let (tr, rep) = solve(&model, &cfg, &z0).unwrap();
    assert_eq!(rep.status, Status::Converged);
    assert!(verify_decay(&model, &tr, &law, &Realization::hgd()) <= 1e-9);
}

#[test]
fn gd_one_sided_decay_on_logsumexp() {
    let (model, z0) = logsumexp();
    let law = DecayLaw::exponential(1.0).unwrap();
    let gd = Realization::gd(1.0).unwrap();
    let (tr, rep) = solve(&model, &SolveConfig::new(law, gd), &z0).unwrap();
    assert_eq!(rep.status, Status::Converged);
    assert!(verify_decay(&model, &tr, &law, &gd) <= 1e-9);
    // GD decays strictly faster than σ here, so the equality check fails
    assert!(verify_decay_against(&model, &tr, (&law, &gd), (&law, &Realization::hgd())) > 1e-3);
}

#[test]
fn newton_fixed_time_on_a_qp() {
    let a = Matrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0]);
    let model = encode_unconstrained(UnconstrainedProblem {
        name: "qp".into(),
        gradient: Box::new(AffineMap::new(a, Vector::from_vec(vec![1.0, -1.0, 2.0])).unwrap()),
        strong_convexity: None,
    })
    .unwrap();
    let law = DecayLaw::fixed_time(1.0, 1.0, 0.5, 1.5).unwrap();
    let cfg = SolveConfig::new(law, Realization::nd());
    let (tr, rep) = solve(&model, &cfg, &Vector::from_vec(vec![3.0, 3.0, -3.0])).unwrap();
    assert_eq!(rep.status, Status::Converged);
    assert!(verify_decay(&model, &tr, &law, &Realization::nd()) <= 1e-9);
    assert!(rep.stop_time <= rep.settling_bound.unwrap());
}

#[test]
fn finite_time_quadratic_within_bound() {
    let (p, spec) = build_quadratic(2).unwrap();
    let model = encode_unconstrained(p).unwrap();
    for r in [Realization::hgd(), Realization::nd(), Realization::gd(1.0).unwrap()] {
        let law = DecayLaw::finite_time(2.0, 0.5).unwrap();
        let (_, rep) = solve(&model, &SolveConfig::new(law, r), &spec.z0_vector()).unwrap();
        assert_eq!(rep.status, Status::Converged);
        assert_eq!(rep.within_bound, Some(true), "{}", r.tag());
    }
}

#[test]
fn prescribed_time_clip_on_logsumexp_with_nd() {
    // μ = 2, T = 5: V(T(1 - δ)) = V₀ δ² in exact arithmetic
    let (model, z0) = logsumexp();
    let law = DecayLaw::prescribed_time(2.0, 5.0).unwrap();
    let cfg = SolveConfig::new(law, Realization::nd());
    let (_, rep) = solve(&model, &cfg, &z0).unwrap();
    assert_eq!(rep.status, Status::HorizonReached);
    assert_eq!(rep.stop_time, cfg.end_time());
    let ratio = rep.final_v / rep.initial_v;
    assert!((ratio / 1e-6 - 1.0).abs() < 1e-6, "ratio {ratio:e}");
}

#[test]
fn exact_encoding_reaches_the_bound_qp_solution() {
    let (p, spec) = build_bound_qp(4, 1e-6).unwrap();
    let model = encode_constrained_exact(p).unwrap();
    let law = DecayLaw::exponential(1.0).unwrap();
    let (tr, rep) = solve(&model, &SolveConfig::new(law, Realization::hgd()), &spec.z0_vector()).unwrap();
    assert_eq!(rep.status, Status::Converged);
    let err = (&tr.last().unwrap().z - spec.solution_vector().unwrap()).amax();
    assert!(err <= 1e-4, "{err}");
}

#[test]
fn smoothed_kkt_limit_point_has_small_block_residuals() {
    let (p, spec) = build_num_default(1e-6).unwrap();
    let model = encode_constrained_fb(p).unwrap();
    let law = DecayLaw::finite_time(1.0, 0.5).unwrap();
    let (tr, rep) = solve(&model, &SolveConfig::new(law, Realization::hgd()), &spec.z0_vector()).unwrap();
    assert_eq!(rep.status, Status::Converged);
    let b = block_residuals(&model, &tr.last().unwrap().z).unwrap();
    assert!(b.max() <= 1e-6, "{b:?}");
}

#[test]
fn num_domain_violation_is_reported() {
    let (p, _) = build_num_default(1e-6).unwrap();
    let model = encode_constrained_fb(p).unwrap();
    let cfg = SolveConfig::new(DecayLaw::exponential(1.0).unwrap(), Realization::hgd());
    let (tr, rep) = solve(&model, &cfg, &Vector::from_vec(vec![-0.5, 0.5, 1.0])).unwrap();
    assert_eq!(rep.status, Status::DomainViolation);
    assert!(tr.is_empty());
    assert!(rep.detail.unwrap().contains("t = 0"));
}

#[test]
fn builtin_specs_solve_with_hgd() {
    for name in BUILTIN_NAMES {
        let spec = problems::builtin(name).unwrap();
        let model = problems::build_model(&spec).unwrap();
        let law = DecayLaw::new(spec.laws.fxt).unwrap();
        let (_, rep) = solve(&model, &SolveConfig::new(law, Realization::hgd()), &spec.z0_vector()).unwrap();
        assert_eq!(rep.status, Status::Converged, "{name}");
        assert!(rep.final_norm_s <= 1e-6);
        assert_eq!(model.dim(), spec.state_dim);
    }
}

#[test]
fn newton_finite_time_does_not_overshoot_the_collapse() {
    // with γ < 1/2 the speed blows up as S → 0; a step that jumps past the
    // zero of S would raise V and skip the stop event
    let b = Matrix::from_row_slice(
        3,
        3,
        &[
            1.3895650385384073,
            0.40060383577677555,
            0.0,
            -1.0106907967893588,
            -0.3366434883158882,
            -1.1978827027562506,
            1.4235110947914413,
            1.2128879006041753,
            -1.1403088141569278,
        ],
    );
    let a = &b * b.transpose() + Matrix::identity(3, 3);
    let rhs = Vector::from_row_slice(&[-1.1541997491412002, 0.0, 1.4298918573403618]);
    let model = encode_unconstrained(UnconstrainedProblem {
        name: "qp".into(),
        gradient: Box::new(AffineMap::new(a, rhs).unwrap()),
        strong_convexity: None,
    })
    .unwrap();
    let law = DecayLaw::finite_time(2.6903823522719676, 0.3624592866464618).unwrap();
    let cfg = SolveConfig::new(law, Realization::nd());
    let z0 = Vector::from_row_slice(&[0.7853320109888735, -0.9369312977519676, 0.15951793286558172]);
    let (tr, rep) = solve(&model, &cfg, &z0).unwrap();
    assert_eq!(rep.status, Status::Converged);
    assert_eq!(rep.within_bound, Some(true));
    for w in tr.samples.windows(2) {
        assert!(w[1].v <= w[0].v * (1.0 + 1e-9), "{} > {}", w[1].v, w[0].v);
    }
}
