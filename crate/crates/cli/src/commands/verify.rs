use std::path::PathBuf;

use anyhow::{anyhow, Result};
use olfkit::dynamics::{Realization, RealizationKind};
use olfkit::integrate::verify_decay_against;
use olfkit::law::DecayLaw;
use olfkit::model::olf_value;
use olfkit::problems::build_model;

use crate::config::{law_from_params, realization_for, Dynamics, LawName};
use crate::trajectory_csv::load_trajectory;

/// Largest accepted decay violation.
pub const DECAY_TOL: f64 = 1e-6;
/// Relative tolerance when comparing recorded and recomputed `V`, `‖S‖`.
const RECORD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, clap::Args)]
pub struct VerifyArgs {
    /// Trajectory CSV written by `run` or `bench`
    pub path: PathBuf,
    /// Realization whose contract is checked (default: the one that
    /// generated the file)
    #[arg(long, value_enum)]
    pub dynamics: Option<Dynamics>,
    #[arg(long)]
    pub gd_m: Option<f64>,
    /// Law whose contract is checked (default: the generating law)
    #[arg(long, value_enum)]
    pub law: Option<LawName>,
    /// Law parameters as key=value
    pub params: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VerifyOutcome {
    Pass {
        violation: f64,
        equality: bool,
    },
    DecayViolated {
        violation: f64,
        equality: bool,
    },
    /// A recorded `V` or `‖S‖` disagrees with the model at that state.
    RecordMismatch {
        index: usize,
        column: &'static str,
        recorded: f64,
        recomputed: f64,
    },
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, VerifyOutcome::Pass { .. })
    }
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= RECORD_TOL * a.abs().max(b.abs())
}

/// Checks a trajectory file: recorded `V` and `‖S‖` must match the model
/// at every recorded state, then the decay contract of the claimed law and
/// realization must hold with `u` from the generating realization.
pub fn verify_file(args: &VerifyArgs) -> Result<VerifyOutcome> {
    let file = load_trajectory(&args.path)?;
    let meta = &file.meta;
    let model = build_model(&meta.spec).map_err(|e| anyhow!("rebuilding `{}`: {e}", meta.spec.name))?;
    let gen_law = DecayLaw::new(meta.law).map_err(|e| anyhow!("metadata `law`: {e}"))?;
    let gen_real = Realization::new(meta.realization).map_err(|e| anyhow!("metadata `realization`: {e}"))?;

    if !args.params.is_empty() && args.law.is_none() {
        return Err(anyhow!("law parameters {:?} given without --law", args.params));
    }
    let claim_law = match args.law {
        Some(name) => {
            let preset = if LawName::of(&meta.law) == name {
                Some(meta.law)
            } else {
                meta.spec.laws.get(name.tag())
            };
            law_from_params(name, &args.params, preset)?
        }
        None => gen_law,
    };
    let claim_real = match args.dynamics {
        Some(d) => {
            let header_m = match meta.realization {
                RealizationKind::Gd { m } => Some(m),
                _ => None,
            };
            realization_for(d, args.gd_m.or(header_m), &meta.spec)?
        }
        None => gen_real,
    };

    for (index, s) in file.trajectory.iter().enumerate() {
        let v = olf_value(&model, &s.z).map_err(|e| anyhow!("sample {index}: {e}"))?;
        let norm_s = (2.0 * v).sqrt();
        if !close(s.v, v) {
            return Ok(VerifyOutcome::RecordMismatch {
                index,
                column: "V",
                recorded: s.v,
                recomputed: v,
            });
        }
        if !close(s.norm_s, norm_s) {
            return Ok(VerifyOutcome::RecordMismatch {
                index,
                column: "normS",
                recorded: s.norm_s,
                recomputed: norm_s,
            });
        }
    }

    let violation = verify_decay_against(
        &model,
        &file.trajectory,
        (&gen_law, &gen_real),
        (&claim_law, &claim_real),
    );
    let equality = claim_real.enforces_equality();
    Ok(if violation <= DECAY_TOL {
        VerifyOutcome::Pass { violation, equality }
    } else {
        VerifyOutcome::DecayViolated { violation, equality }
    })
}

/// Exit 0 on pass, 2 on a failed check, 1 on unreadable input.
pub fn cmd_verify(args: &VerifyArgs) -> Result<u8> {
    let outcome = verify_file(args)?;
    let sided = |eq: bool| if eq { "two-sided" } else { "one-sided" };
    match &outcome {
        VerifyOutcome::Pass { violation, equality } => {
            println!(
                "PASS max violation {violation:.3e} ({}, tolerance {DECAY_TOL:e})",
                sided(*equality)
            );
        }
        VerifyOutcome::DecayViolated { violation, equality } => {
            println!(
                "FAIL max violation {violation:.3e} ({}, tolerance {DECAY_TOL:e})",
                sided(*equality)
            );
        }
        VerifyOutcome::RecordMismatch {
            index,
            column,
            recorded,
            recomputed,
        } => {
            println!("FAIL sample {index}: recorded {column} = {recorded:.16e}, model gives {recomputed:.16e}");
        }
    }
    Ok(if outcome.passed() { 0 } else { 2 })
}
