//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use olfkit::dynamics::Realization;
use olfkit::encodings::{
    encode_constrained_exact, encode_constrained_fb, encode_gne, encode_minimax, encode_unconstrained, fb_smooth,
    ConstrainedProblem,
};
use olfkit::integrate::{solve, SolveConfig, SolveReport, Status, Trajectory};
use olfkit::law::DecayLaw;
use olfkit::linalg::{min_sym_eigenvalue, Matrix, Vector};
use olfkit::maps::{AffineMap, FnMap};
use olfkit::model::{fd_check, olf_gradient, StationarityModel};
use olfkit::problems::{
    bound_qp_affine, build_bound_qp, build_cournot, build_logsumexp, build_minimax_toy, build_num_default,
    build_quadratic, minimax_toy_affine, oracle_active_set, oracle_kkt_affine, BenchmarkSpec, CournotParams,
    MinimaxVariant,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-6;
const TOL: f64 = 1e-6;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run(model: &dyn StationarityModel, law: DecayLaw, r: Realization, z0: &Vector) -> (Trajectory, SolveReport) {
    let cfg = SolveConfig::new(law, r);
    solve(model, &cfg, z0).expect("valid solver configuration")
}

fn label(r: &Realization, law: &DecayLaw) -> String {
    format!("{}/{}", r.tag(), law.tag())
}

struct LogsumexpRun {
    realization: Realization,
    law: DecayLaw,
    trajectory: Trajectory,
    report: SolveReport,
}

fn logsumexp_matrix() -> (Vec<LogsumexpRun>, f64) {
    let (p, spec) = build_logsumexp(50).unwrap();
    let model = encode_unconstrained(p).unwrap();
    let z0 = spec.z0_vector();
    let start = Instant::now();
    let mut runs = Vec::new();
    for realization in [Realization::gd(1.0).unwrap(), Realization::nd(), Realization::hgd()] {
        for law in spec.laws.all().unwrap() {
            let (trajectory, report) = run(&model, law, realization, &z0);
            runs.push(LogsumexpRun {
                realization,
                law,
                trajectory,
                report,
            });
        }
    }
    (runs, start.elapsed().as_secs_f64())
}

fn criterion_1(runs: &[LogsumexpRun], secs: f64) -> Outcome {
    for r in runs {
        ensure(
            r.report.status == Status::Converged && r.report.final_norm_s <= TOL,
            || {
                format!(
                    "{} ended {} with ‖∇J‖ = {:e}",
                    label(&r.realization, &r.law),
                    r.report.status,
                    r.report.final_norm_s
                )
            },
        )?;
    }
    ensure(runs.len() == 12, || format!("{} runs", runs.len()))?;
    ensure(secs <= 60.0, || format!("matrix took {secs:.1} s"))?;
    let evals: usize = runs.iter().map(|r| r.report.field_evals).sum();
    Ok(format!("12/12 Converged, {secs:.2} s, {evals} field evaluations"))
}

fn criterion_2(runs: &[LogsumexpRun]) -> Outcome {
    let mut worst: f64 = 0.0;
    for r in runs {
        let v = r.report.decay_violation;
        ensure(v <= 1e-6, || {
            format!("{} violation {v:e}", label(&r.realization, &r.law))
        })?;
        worst = worst.max(v);
    }
    Ok(format!("worst violation {worst:.2e}"))
}

fn criterion_3(runs: &[LogsumexpRun]) -> Outcome {
    let mut notes = Vec::new();
    for r in runs {
        match r.law.tag() {
            "ft" | "fxt" => {
                let bound = r.report.settling_bound.expect("bounded law");
                ensure(r.report.stop_time <= bound, || {
                    format!(
                        "{} stopped at {} past bound {bound}",
                        label(&r.realization, &r.law),
                        r.report.stop_time
                    )
                })?;
                notes.push(format!(
                    "{} {:.2}/{:.2} (margin {:.1e})",
                    label(&r.realization, &r.law),
                    r.report.stop_time,
                    bound,
                    bound - r.report.stop_time
                ));
            }
            "pt" => {
                // integrate to the clip time itself and read V there
                let (p, spec) = build_logsumexp(50).unwrap();
                let model = encode_unconstrained(p).unwrap();
                let mut cfg = SolveConfig::new(r.law, r.realization);
                cfg.tol_stat = f64::MIN_POSITIVE;
                let (_, rep) = solve(&model, &cfg, &spec.z0_vector()).unwrap();
                let clip = cfg.end_time();
                ensure(rep.status == Status::HorizonReached && rep.stop_time == clip, || {
                    format!(
                        "{} stopped {} at {}",
                        label(&r.realization, &r.law),
                        rep.status,
                        rep.stop_time
                    )
                })?;
                let ratio = rep.final_v / rep.initial_v;
                ensure(ratio <= 1e-6, || {
                    format!("{} V(clip)/V0 = {ratio:e}", label(&r.realization, &r.law))
                })?;
                notes.push(format!("{} V(clip)/V0={ratio:.1e}", label(&r.realization, &r.law)));
            }
            _ => {}
        }
    }
    Ok(notes.join(", "))
}

/// Least-squares slope of `ln V` against `t` over the middle 80% of samples.
fn log_slope(tr: &Trajectory) -> f64 {
    let n = tr.len();
    let lo = n / 10;
    let hi = n - n / 10;
    let pts: Vec<(f64, f64)> = tr.samples[lo..hi].iter().map(|s| (s.t, s.v.ln())).collect();
    let k = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let mv = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let cov: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - mv)).sum();
    let var: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    cov / var
}

fn criterion_4(runs: &[LogsumexpRun]) -> Outcome {
    let mut notes = Vec::new();
    for r in runs
        .iter()
        .filter(|r| r.law.tag() == "exp" && r.realization.enforces_equality())
    {
        let c = match r.law.kind() {
            olfkit::LawKind::Exponential { c } => c,
            _ => unreachable!(),
        };
        let slope = log_slope(&r.trajectory);
        ensure(slope >= -c * 1.05 && slope <= -c * 0.95, || {
            format!("{} slope {slope} for c = {c}", label(&r.realization, &r.law))
        })?;
        notes.push(format!("{} slope {slope:.6}", label(&r.realization, &r.law)));
    }
    ensure(notes.len() == 2, || "missing HGD/ND exponential runs".into())?;
    Ok(notes.join(", "))
}

fn criterion_5() -> Outcome {
    let (p, spec) = build_quadratic(2).unwrap();
    let model = encode_unconstrained(p).unwrap();
    let x0 = spec.z0_vector();
    let (tr, rep) = run(
        &model,
        DecayLaw::exponential(2.0).unwrap(),
        Realization::gd(1.0).unwrap(),
        &x0,
    );
    ensure(rep.status == Status::Converged, || format!("status {}", rep.status))?;
    ensure(tr.len() >= 10, || format!("only {} samples", tr.len()))?;
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let s = &tr.samples[k * (tr.len() - 1) / 9];
        let exact = x0.scale((-s.t).exp());
        let err = (&s.z - &exact).norm() / exact.norm();
        ensure(err <= 1e-6, || format!("t = {}: relative error {err:e}", s.t))?;
        worst = worst.max(err);
    }
    Ok(format!(
        "worst relative error {worst:.2e} over 10 times up to t = {:.2}",
        rep.stop_time
    ))
}

fn primal_and_multiplier_errors(z: &Vector, oracle: &Vector, n: usize) -> (f64, f64) {
    let d = z - oracle;
    let primal = d.rows(0, n).amax();
    let mult = if d.len() > n {
        d.rows(n, d.len() - n).amax()
    } else {
        0.0
    };
    (primal, mult)
}

fn criterion_6() -> Outcome {
    let n = 3;
    let oracle = oracle_kkt_affine(&bound_qp_affine(n), &[0]).map_err(|e| e.to_string())?;
    let mut worst = (0.0_f64, 0.0_f64);
    for law in build_bound_qp(n, EPS).unwrap().1.laws.all().unwrap() {
        let (p, spec) = build_bound_qp(n, EPS).unwrap();
        let model = encode_constrained_fb(p).unwrap();
        let (tr, rep) = run(&model, law, Realization::hgd(), &spec.z0_vector());
        ensure(rep.status == Status::Converged, || {
            format!("fb/{}: {}", law.tag(), rep.status)
        })?;
        let (ep, em) = primal_and_multiplier_errors(&tr.last().unwrap().z, &oracle, n);
        ensure(ep <= 1e-4 && em <= 1e-4 + 10.0 * EPS, || {
            format!("fb/{}: errors {ep:e} / {em:e}", law.tag())
        })?;
        worst = (worst.0.max(ep), worst.1.max(em));
    }
    let mut exact_worst: f64 = 0.0;
    for law in build_bound_qp(n, EPS).unwrap().1.laws.all().unwrap() {
        let (p, spec) = build_bound_qp(n, EPS).unwrap();
        let model = encode_constrained_exact(p).unwrap();
        let (tr, rep) = run(&model, law, Realization::hgd(), &spec.z0_vector());
        ensure(rep.status == Status::Converged, || {
            format!("exact/{}: {}", law.tag(), rep.status)
        })?;
        let err = (&tr.last().unwrap().z - &oracle).amax();
        ensure(err <= 1e-4, || format!("exact/{}: error {err:e}", law.tag()))?;
        exact_worst = exact_worst.max(err);
    }
    Ok(format!(
        "FB primal {:.1e} multiplier {:.1e}; exact {:.1e}",
        worst.0, worst.1, exact_worst
    ))
}

fn criterion_7() -> Outcome {
    let mut notes = Vec::new();
    for law in build_num_default(EPS).unwrap().1.laws.all().unwrap() {
        let (p, spec) = build_num_default(EPS).unwrap();
        let model = encode_constrained_fb(p).unwrap();
        let (tr, rep) = run(&model, law, Realization::hgd(), &spec.z0_vector());
        ensure(rep.status == Status::Converged, || {
            format!("{}: {} {:?}", law.tag(), rep.status, rep.detail)
        })?;
        let z = &tr.last().unwrap().z;
        let err = (z - spec.solution_vector().unwrap()).amax();
        ensure(err <= 1e-4, || {
            format!("{}: distance {err:e} from (0.5, 0.5; 2)", law.tag())
        })?;
        let b = rep.final_residuals;
        ensure(b.max() <= TOL, || format!("{}: block residuals {b:?}", law.tag()))?;
        let load = z[0] + z[1] - 1.0;
        ensure(load <= EPS, || format!("{}: link load excess {load:e}", law.tag()))?;
        notes.push(format!("{} t={:.2}", law.tag(), rep.stop_time));
    }
    Ok(notes.join(", "))
}

fn criterion_8() -> Outcome {
    let params = CournotParams::default();
    let vi = params.affine();
    let lam_min = min_sym_eigenvalue(&vi.q);
    ensure(lam_min > 0.0, || format!("sym(∇𝒢) min eigenvalue {lam_min}"))?;
    let oracle = oracle_active_set(&vi).map_err(|e| e.to_string())?;
    let n = vi.dim();
    let mut notes = Vec::new();
    for law in build_cournot(EPS).unwrap().1.laws.all().unwrap() {
        let (p, spec) = build_cournot(EPS).unwrap();
        let model = encode_gne(p, EPS).unwrap();
        let (tr, rep) = run(&model, law, Realization::hgd(), &spec.z0_vector());
        ensure(rep.status == Status::Converged && rep.final_norm_s <= TOL, || {
            format!(
                "{}: {} ‖S‖ = {:e} {:?}",
                law.tag(),
                rep.status,
                rep.final_norm_s,
                rep.detail
            )
        })?;
        let z = &tr.last().unwrap().z;
        let (ep, em) = primal_and_multiplier_errors(z, &oracle, n);
        ensure(ep <= 1e-4 && em <= 1e-4 + 10.0 * EPS, || {
            format!("{}: oracle errors {ep:e} / {em:e}", law.tag())
        })?;
        ensure(rep.final_residuals.equality <= TOL, || {
            format!("{}: equality residual", law.tag())
        })?;
        let slack = vi.slack(&z.rows(0, n).into_owned()).max();
        ensure(slack <= EPS, || format!("{}: constraint excess {slack:e}", law.tag()))?;
        notes.push(format!("{} t={:.2}", law.tag(), rep.stop_time));
    }
    Ok(format!("min eig {lam_min}; {}", notes.join(", ")))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for eps in [1e-3, 1e-6] {
        for _ in 0..10_000 {
            let a = rng.random_range(-10.0..10.0);
            let b = rng.random_range(-10.0..10.0);
            let d = (fb_smooth(a, b, eps) - fb_smooth(a, b, 0.0)).abs();
            ensure(d <= eps, || format!("ε = {eps}: ({a}, {b}) off by {d:e}"))?;
        }
    }
    // zero set of the exact function in the (λ, -g) convention:
    // λ ≥ 0, g ≤ 0, λg = 0
    for i in 0..=100 {
        for j in 0..=100 {
            let lam = -5.0 + 0.1 * i as f64;
            let g = -5.0 + 0.1 * j as f64;
            let on_set = lam >= -1e-12 && g <= 1e-12 && (lam * g).abs() <= 1e-12;
            let zero = fb_smooth(lam, -g, 0.0).abs() <= 1e-12;
            ensure(on_set == zero, || format!("grid point λ = {lam}, g = {g}"))?;
        }
    }
    Ok("2×10⁴ random pairs and the 101×101 grid".into())
}

fn fd_worst(model: &dyn StationarityModel, states: impl Iterator<Item = Vector>) -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for z in states {
        worst = worst.max(fd_check(model, &z, None).map_err(|e| e.to_string())?);
    }
    Ok(worst)
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut notes = Vec::new();
    let mut check = |name: &str, model: &dyn StationarityModel, states: Vec<Vector>| -> Result<(), String> {
        ensure(states.len() == 20, || format!("{name}: {} states", states.len()))?;
        let w = fd_worst(model, states.into_iter())?;
        ensure(w <= 1e-5, || format!("{name}: fd error {w:e}"))?;
        notes.push(format!("{name} {w:.0e}"));
        Ok(())
    };
    let uniform = |rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64| -> Vec<Vector> {
        (0..20)
            .map(|_| Vector::from_fn(n, |_, _| rng.random_range(lo..hi)))
            .collect()
    };

    let lse = encode_unconstrained(build_logsumexp(50).unwrap().0).unwrap();
    let st = uniform(&mut rng, 50, -2.0, 2.0);
    check("logsumexp", &lse, st)?;
    let quad = encode_unconstrained(build_quadratic(2).unwrap().0).unwrap();
    let st = uniform(&mut rng, 2, -2.0, 2.0);
    check("quadratic", &quad, st)?;
    let fb = encode_constrained_fb(build_bound_qp(3, EPS).unwrap().0).unwrap();
    let st = uniform(&mut rng, 4, -2.0, 2.0);
    check("bound-qp fb", &fb, st)?;
    // exact encoding: keep |g| and |λ| away from the kinks
    let exact = encode_constrained_exact(build_bound_qp(3, EPS).unwrap().0).unwrap();
    let st = (0..20)
        .map(|_| {
            let mut z = Vector::from_fn(4, |_, _| rng.random_range(-2.0..2.0));
            let away = |v: f64| if v.abs() < 0.1 { v + 0.2_f64.copysign(v) } else { v };
            z[0] = 1.0 + away(z[0] - 1.0);
            z[3] = away(z[3]);
            z
        })
        .collect();
    check("bound-qp exact", &exact, st)?;
    let num = encode_constrained_fb(build_num_default(EPS).unwrap().0).unwrap();
    let st = (0..20)
        .map(|_| {
            Vector::from_vec(vec![
                rng.random_range(0.1..2.0),
                rng.random_range(0.1..2.0),
                rng.random_range(-1.0..3.0),
            ])
        })
        .collect();
    check("num", &num, st)?;
    let cournot = encode_gne(build_cournot(EPS).unwrap().0, EPS).unwrap();
    let st = uniform(&mut rng, 19, -2.0, 4.0);
    check("cournot", &cournot, st)?;
    for variant in [MinimaxVariant::Inequality, MinimaxVariant::Equality] {
        let m = encode_minimax(build_minimax_toy(variant, EPS).unwrap().0, EPS).unwrap();
        let st = uniform(&mut rng, 3, -2.0, 2.0);
        check(&format!("minimax {variant:?}"), &m, st)?;
    }
    Ok(notes.join(", "))
}

/// Strongly convex QP with one affine equality, one affine and one convex
/// quadratic inequality.
fn energy_test_problem() -> (olfkit::encodings::KktModel, Matrix, Vector) {
    let n = 4;
    let h = Matrix::from_row_slice(
        n,
        n,
        &[
            3.0, 0.5, 0.0, 0.2, //
            0.5, 2.5, 0.3, 0.0, //
            0.0, 0.3, 3.0, 0.4, //
            0.2, 0.0, 0.4, 2.0,
        ],
    );
    let c = Vector::from_vec(vec![1.0, -2.0, 0.5, 1.0]);
    let a = Matrix::from_row_slice(1, n, &[1.0, 1.0, 1.0, 1.0]);
    let b = Vector::from_element(1, 1.0);
    // g₁ = x₁ - 0.5, g₂ = ½‖x‖² - 2
    let ineq = FnMap::new(
        n,
        2,
        |x: &Vector| Ok(Vector::from_vec(vec![x[0] - 0.5, 0.5 * x.norm_squared() - 2.0])),
        move |x: &Vector| {
            let mut j = Matrix::zeros(2, 4);
            j[(0, 0)] = 1.0;
            j.row_mut(1).copy_from(&x.transpose());
            Ok(j)
        },
    )
    .with_weighted_hessian(move |_, w: &Vector| Ok(Matrix::identity(4, 4) * w[1]));
    let problem = ConstrainedProblem {
        name: "energy-qp".into(),
        gradient: Box::new(AffineMap::new(h.clone(), -c).unwrap()),
        ineq: Some(Box::new(ineq)),
        eq: Some(Box::new(AffineMap::new(a.clone(), b.clone()).unwrap())),
        eps: EPS,
    };
    (encode_constrained_fb(problem).unwrap(), a, b)
}

fn criterion_11() -> Outcome {
    let (model, a, b) = energy_test_problem();
    let n = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut min_ratio = f64::INFINITY;
    let mut min_energy = f64::INFINITY;
    let mut dominant = 0;
    let mut checked = 0;
    // projector onto {Ax = b}
    let aat = (&a * a.transpose())[(0, 0)];
    let project = |x: Vector| -> Vector {
        let r = (&a * &x - &b)[0];
        x - a.transpose() * (r / aat)
    };
    let mut k = 0;
    while checked < 100 {
        k += 1;
        let z = if k % 2 == 0 {
            Vector::from_fn(7, |i, _| match i {
                0..=3 => rng.random_range(-2.0..2.0),
                4 | 5 => rng.random_range(-1.0..2.0),
                _ => rng.random_range(-2.0..2.0),
            })
        } else {
            // feasible primal point with strictly inactive constraints and
            // near-zero multipliers
            let x = project(Vector::from_fn(n, |_, _| rng.random_range(-0.6..0.6)));
            if x[0] >= 0.4 || 0.5 * x.norm_squared() >= 1.9 {
                continue;
            }
            let mut z = Vector::zeros(7);
            z.rows_mut(0, n).copy_from(&x);
            z[4] = rng.random_range(0.0..1e-3);
            z[5] = rng.random_range(0.0..1e-3);
            z[6] = rng.random_range(-2.0..2.0);
            z
        };
        let (s, j) = model.residual_and_jacobian(&z).map_err(|e| e.to_string())?;
        let s_norm = s.norm();
        if s_norm <= 1e-3 {
            continue;
        }
        checked += 1;
        let grad = olf_gradient(&model, &z).map_err(|e| e.to_string())?;
        ensure(grad.norm() > 0.0, || format!("∇V vanishes at {z:?}"))?;
        min_ratio = min_ratio.min(grad.norm() / s_norm);
        let r = s.rows(0, n).norm();
        let rest = s.rows(n, 3).norm();
        if r >= 10.0 * rest {
            dominant += 1;
            let energy = s.dot(&(&j * &s)) / (s_norm * s_norm);
            min_energy = min_energy.min(energy);
        }
    }
    ensure(dominant >= 10, || format!("only {dominant} primal-dominant samples"))?;
    ensure(min_energy >= 0.0, || format!("min Sᵀ∇S S/‖S‖² = {min_energy}"))?;
    Ok(format!(
        "min ‖∇V‖/‖S‖ = {min_ratio:.3e}; {dominant} primal-dominant samples, min Sᵀ∇S S/‖S‖² = {min_energy:.3}"
    ))
}

fn criterion_12() -> Outcome {
    let mut notes = Vec::new();
    for variant in [MinimaxVariant::Inequality, MinimaxVariant::Equality] {
        let oracle = oracle_active_set(&minimax_toy_affine(variant)).map_err(|e| e.to_string())?;
        let spec: BenchmarkSpec = build_minimax_toy(variant, EPS).unwrap().1;
        for law in spec.laws.all().unwrap() {
            let model = encode_minimax(build_minimax_toy(variant, EPS).unwrap().0, EPS).unwrap();
            let (tr, rep) = run(&model, law, Realization::hgd(), &spec.z0_vector());
            ensure(rep.status == Status::Converged && rep.final_norm_s <= TOL, || {
                format!("{variant:?}/{}: {} {:?}", law.tag(), rep.status, rep.detail)
            })?;
            let err = (&tr.last().unwrap().z - &oracle).amax();
            ensure(err <= 1e-4, || format!("{variant:?}/{}: distance {err:e}", law.tag()))?;
        }
        notes.push(format!("{variant:?} saddle {:?}", oracle.as_slice()));
    }
    Ok(notes.join("; "))
}

fn main() -> ExitCode {
    let (runs, secs) = logsumexp_matrix();
    let results: Vec<(&str, Outcome)> = vec![
        ("twelve-case log-sum-exp matrix converges", criterion_1(&runs, secs)),
        ("decay law holds along every run", criterion_2(&runs)),
        ("settling bounds and prescribed-time clip", criterion_3(&runs)),
        ("exponential rate matches c", criterion_4(&runs)),
        ("closed-form gradient flow", criterion_5()),
        ("bound-constrained QP matches KKT oracle", criterion_6()),
        ("network utility instance", criterion_7()),
        ("Cournot v-GNE", criterion_8()),
        ("Fischer-Burmeister properties", criterion_9()),
        ("analytic Jacobians vs finite differences", criterion_10()),
        ("nonsingularity and energy on a convex QP", criterion_11()),
        ("minimax saddle under all laws", criterion_12()),
    ];
    let mut failed = 0;
    for (i, (title, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("PASS {:>2} {title}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {title}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
