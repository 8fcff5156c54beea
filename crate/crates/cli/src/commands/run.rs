use anyhow::{Context, Result};
use olfkit::integrate::{solve, verify_decay};
use olfkit::linalg::Vector;
use olfkit::model::{fd_check, StationarityModel};
use olfkit::problems::primal_feasibility;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{resolve_run, RunArgs};
use crate::status_exit_code;
use crate::trajectory_csv::{save_trajectory, TrajectoryMeta};

/// Relative size of the random perturbation applied before the check.
const CHECK_PERTURBATION: f64 = 1e-3;

/// Finite-difference Jacobian check at a seeded random perturbation of `z`.
/// `None` when the perturbed state leaves the model's domain.
pub fn seeded_jacobian_check(model: &dyn StationarityModel, z: &Vector, seed: u64) -> Option<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zp = z.map(|v| v + CHECK_PERTURBATION * (1.0 + v.abs()) * rng.random_range(-1.0..1.0));
    fd_check(model, &zp, None).ok()
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6e}"))
}

pub fn cmd_run(args: &RunArgs) -> Result<u8> {
    let r = resolve_run(args)?;
    let (traj, rep) = solve(&r.model, &r.config, &r.z0).context("solver setup")?;
    let meta = TrajectoryMeta::new(
        r.spec.clone(),
        r.config.law.kind(),
        r.config.realization.kind(),
        rep.status,
        rep.stop_time,
    );
    save_trajectory(&r.out, &meta, &traj)?;
    let violation = verify_decay(&r.model, &traj, &r.config.law, &r.config.realization);
    let check = seeded_jacobian_check(r.model.as_ref(), &r.z0, r.seed);

    let sided = if r.config.realization.enforces_equality() {
        "two-sided"
    } else {
        "one-sided"
    };
    println!("problem          {}", r.spec.name);
    println!("dynamics         {}", r.dynamics.tag());
    println!("law              {:?}", r.config.law.kind());
    println!("status           {}", rep.status);
    println!("stop time        {:.6e}", rep.stop_time);
    println!("settling bound   {}", opt(rep.settling_bound));
    if let Some(w) = rep.within_bound {
        println!("within bound     {w}");
    }
    println!("decay violation  {violation:.3e} ({sided})");
    println!("initial V        {:.6e}", rep.initial_v);
    println!("final V          {:.6e}", rep.final_v);
    println!("final |S|        {:.6e}", rep.final_norm_s);
    println!(
        "block residuals  stat {:.3e}  eq {:.3e}  ineq {:.3e}",
        rep.final_residuals.stationarity, rep.final_residuals.equality, rep.final_residuals.inequality
    );
    if let Some(last) = traj.last() {
        if let Ok(f) = primal_feasibility(&r.spec, &last.z) {
            println!("feasibility      ineq {:.3e}  eq {:.3e}", f.inequality, f.equality);
        }
        if let Some(sol) = r.spec.solution_vector() {
            println!("solution error   {:.3e}", (&last.z - sol).amax());
        }
    }
    println!(
        "steps            {} accepted, {} rejected, {} field evaluations",
        rep.accepted_steps, rep.rejected_steps, rep.field_evals
    );
    println!("jacobian check   {} (seed {})", opt(check), r.seed);
    if let Some(d) = &rep.detail {
        println!("detail           {d}");
    }
    println!("trajectory       {}", r.out.display());
    Ok(status_exit_code(rep.status))
}
