use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::ValueEnum;
use olfkit::dynamics::Realization;
use olfkit::integrate::{solve, verify_decay, SolveConfig, Status};
use olfkit::law::DecayLaw;
use olfkit::model::BlockResiduals;
use olfkit::problems::{build_model, primal_feasibility, BenchmarkSpec};
use rayon::prelude::*;

use crate::config::{builtin_spec, realization_for, resolve_out, Dynamics, SolverArgs};
use crate::status_exit_code;
use crate::trajectory_csv::{save_trajectory, TrajectoryMeta};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// log-sum-exp, every dynamics under every law
    Logsumexp12,
    /// network utility maximization, HGD under every law
    Num4,
    /// Cournot game, HGD under every law
    Cournot4,
    All,
}

impl Suite {
    pub fn tag(&self) -> &'static str {
        match self {
            Suite::Logsumexp12 => "logsumexp12",
            Suite::Num4 => "num4",
            Suite::Cournot4 => "cournot4",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Clone, clap::Args)]
pub struct BenchArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Output directory (relative paths go under $OLFKIT_OUT_DIR)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub struct BenchCase {
    pub name: String,
    pub spec: BenchmarkSpec,
    pub dynamics: Dynamics,
    pub config: SolveConfig,
}

/// One row of the summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseResult {
    pub case: String,
    pub status: Status,
    /// Prescribed-time rows report the clip time `T(1 - δ_h)`; the others
    /// report `tol_time`.
    pub stop_time: f64,
    /// First time `‖S‖ ≤ tol_stat` was reached, if it was.
    pub tol_time: Option<f64>,
    pub bound: Option<f64>,
    pub within_bound: Option<bool>,
    pub violation: f64,
    pub final_norm_s: f64,
    pub residuals: BlockResiduals,
    pub infeas_ineq: f64,
    pub infeas_eq: f64,
    pub solution_error: Option<f64>,
    pub csv: PathBuf,
}

/// The cases a suite runs, in summary order.
pub fn bench_cases(suite: Suite, solver: &SolverArgs) -> Result<Vec<BenchCase>> {
    let mut plan: Vec<(&str, Vec<Dynamics>)> = Vec::new();
    if matches!(suite, Suite::Logsumexp12 | Suite::All) {
        plan.push(("logsumexp", vec![Dynamics::Gd, Dynamics::Nd, Dynamics::Hgd]));
    }
    if matches!(suite, Suite::Num4 | Suite::All) {
        plan.push(("num", vec![Dynamics::Hgd]));
    }
    if matches!(suite, Suite::Cournot4 | Suite::All) {
        plan.push(("cournot", vec![Dynamics::Hgd]));
    }
    let mut cases = Vec::new();
    for (problem, dynamics) in plan {
        let mut spec = builtin_spec(problem)?;
        solver.apply_to_spec(&mut spec)?;
        for d in dynamics {
            let realization: Realization = realization_for(d, None, &spec)?;
            for tag in ["exp", "ft", "fxt", "pt"] {
                let kind = spec.laws.get(tag).expect("every preset tag exists");
                let law = DecayLaw::new(kind).map_err(|e| anyhow!("{problem} {tag} preset: {e}"))?;
                cases.push(BenchCase {
                    name: format!("{problem}-{}-{tag}", d.tag()),
                    spec: spec.clone(),
                    dynamics: d,
                    config: solver.solve_config(law, realization)?,
                });
            }
        }
    }
    Ok(cases)
}

fn run_case(case: &BenchCase, dir: &Path) -> Result<CaseResult> {
    let model = build_model(&case.spec).with_context(|| format!("case {}", case.name))?;
    let z0 = case.spec.z0_vector();
    let (traj, rep) = solve(&model, &case.config, &z0).with_context(|| format!("case {}", case.name))?;
    let csv = dir.join(format!("{}.csv", case.name));
    let meta = TrajectoryMeta::new(
        case.spec.clone(),
        case.config.law.kind(),
        case.config.realization.kind(),
        rep.status,
        rep.stop_time,
    );
    save_trajectory(&csv, &meta, &traj)?;
    let violation = verify_decay(&model, &traj, &case.config.law, &case.config.realization);
    let last_z = traj.last().map(|s| s.z.clone()).unwrap_or(z0);
    let feas = primal_feasibility(&case.spec, &last_z).with_context(|| format!("case {}", case.name))?;
    let converged = rep.status == Status::Converged;
    let stop_time = match case.config.law.horizon() {
        Some(_) if converged => case.config.end_time(),
        _ => rep.stop_time,
    };
    Ok(CaseResult {
        case: case.name.clone(),
        status: rep.status,
        stop_time,
        tol_time: converged.then_some(rep.stop_time),
        bound: rep.settling_bound,
        within_bound: rep.within_bound,
        violation,
        final_norm_s: rep.final_norm_s,
        residuals: rep.final_residuals,
        infeas_ineq: feas.inequality,
        infeas_eq: feas.equality,
        solution_error: case.spec.solution_vector().map(|s| (&last_z - s).amax()),
        csv,
    })
}

const SUMMARY_COLUMNS: [&str; 14] = [
    "case",
    "status",
    "stop_time",
    "tol_time",
    "bound",
    "within_bound",
    "violation",
    "final_normS",
    "res_stat",
    "res_eq",
    "res_ineq",
    "infeas_ineq",
    "infeas_eq",
    "solution_error",
];

fn summary_row(r: &CaseResult) -> Vec<String> {
    let f = |x: f64| format!("{x:.6e}");
    let o = |x: Option<f64>| x.map_or_else(|| "-".to_string(), f);
    vec![
        r.case.clone(),
        r.status.to_string(),
        f(r.stop_time),
        o(r.tol_time),
        o(r.bound),
        r.within_bound.map_or_else(|| "-".to_string(), |b| b.to_string()),
        format!("{:.3e}", r.violation),
        f(r.final_norm_s),
        f(r.residuals.stationarity),
        f(r.residuals.equality),
        f(r.residuals.inequality),
        f(r.infeas_ineq),
        f(r.infeas_eq),
        o(r.solution_error),
    ]
}

/// Summary as CSV.
pub fn summary_csv(results: &[CaseResult]) -> String {
    let mut s = SUMMARY_COLUMNS.join(",");
    s.push('\n');
    for r in results {
        s.push_str(&summary_row(r).join(","));
        s.push('\n');
    }
    s
}

/// Summary as an aligned text table.
pub fn summary_table(results: &[CaseResult]) -> String {
    let rows: Vec<Vec<String>> = results.iter().map(summary_row).collect();
    let widths: Vec<usize> = (0..SUMMARY_COLUMNS.len())
        .map(|j| {
            rows.iter()
                .map(|r| r[j].len())
                .chain([SUMMARY_COLUMNS[j].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(SUMMARY_COLUMNS.to_vec(), &mut out);
    for r in &rows {
        line(r.iter().map(String::as_str).collect(), &mut out);
    }
    out
}

pub fn cmd_bench(args: &BenchArgs) -> Result<u8> {
    let cases = bench_cases(args.suite, &args.solver)?;
    let dir = match &args.out {
        Some(p) => resolve_out(p),
        None => resolve_out(Path::new(&format!("bench-{}", args.suite.tag()))),
    };
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    // cases are independent; collect keeps the summary in case order
    let results: Vec<CaseResult> = cases.par_iter().map(|c| run_case(c, &dir)).collect::<Result<_>>()?;
    let summary = dir.join("summary.csv");
    fs::write(&summary, summary_csv(&results)).with_context(|| format!("writing {}", summary.display()))?;
    print!("{}", summary_table(&results));
    let converged = results.iter().filter(|r| r.status == Status::Converged).count();
    println!(
        "{converged} of {} cases converged; summary in {}",
        results.len(),
        summary.display()
    );
    Ok(results.iter().map(|r| status_exit_code(r.status)).max().unwrap_or(0))
}
