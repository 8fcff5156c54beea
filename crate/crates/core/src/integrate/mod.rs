//! Adaptive integration of the closed loop `ż = u(z, t)`.
//!
//! [`solve`] runs a Dormand–Prince 5(4) pair until `‖S(z)‖ ≤ tol_stat`, the
//! time budget runs out, or the field reports an error. The stop time is
//! located by bisecting the final step. For prescribed-time
//! laws the horizon is clipped to `T(1 - δ_h)` since `σ` blows up at `T`.

mod dopri;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cell::Cell;
use core::fmt;

use crate::dynamics::{FieldError, Realization};
use crate::law::DecayLaw;
use crate::linalg::Vector;
use crate::model::{check_dim, BlockResiduals, ModelError, StationarityModel};
use dopri::{initial_step, step_factor, try_step, Derivative};

pub const DEFAULT_TOL_STAT: f64 = 1e-6;
pub const DEFAULT_REL_TOL: f64 = 1e-9;
pub const DEFAULT_ABS_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_TIME: f64 = 200.0;
pub const DEFAULT_PT_CLIP: f64 = 1e-3;
pub const DEFAULT_SAMPLES: usize = 400;
pub const DEFAULT_MAX_STEPS: usize = 1_000_000;

/// Stop-event location: bisect the final step until its bracket is below
/// `EVENT_REL_TOL · max(1, t)`, at most `EVENT_BISECTIONS` times.
const EVENT_REL_TOL: f64 = 1e-10;
const EVENT_BISECTIONS: usize = 48;

/// Factor applied to `h` when a trial step fails to evaluate or raises `V`.
const EVAL_FAILURE_SHRINK: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub law: DecayLaw,
    pub realization: Realization,
    /// Stop once `‖S(z)‖ ≤ tol_stat`.
    pub tol_stat: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_time: f64,
    /// `δ_h`: prescribed-time runs stop at `T(1 - δ_h)`.
    pub pt_clip: f64,
    /// Number of recorded samples (first and last state always kept).
    pub samples: usize,
    pub max_steps: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("invalid solver setting {name} = {value}")]
    InvalidConfig { name: &'static str, value: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

impl From<ModelError> for SolveError {
    fn from(e: ModelError) -> Self {
        SolveError::Field(e.into())
    }
}

impl SolveConfig {
    pub fn new(law: DecayLaw, realization: Realization) -> Self {
        Self {
            law,
            realization,
            tol_stat: DEFAULT_TOL_STAT,
            rel_tol: DEFAULT_REL_TOL,
            abs_tol: DEFAULT_ABS_TOL,
            max_time: DEFAULT_MAX_TIME,
            pt_clip: DEFAULT_PT_CLIP,
            samples: DEFAULT_SAMPLES,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        let positive = [
            ("tol_stat", self.tol_stat),
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_time", self.max_time),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(SolveError::InvalidConfig { name, value });
            }
        }
        if !(self.pt_clip > 0.0 && self.pt_clip < 1.0) {
            return Err(SolveError::InvalidConfig {
                name: "pt_clip",
                value: self.pt_clip,
            });
        }
        if self.samples < 2 {
            return Err(SolveError::InvalidConfig {
                name: "samples",
                value: self.samples as f64,
            });
        }
        if self.max_steps == 0 {
            return Err(SolveError::InvalidConfig {
                name: "max_steps",
                value: 0.0,
            });
        }
        Ok(())
    }

    /// Final integration time: `max_time`, or `T(1 - δ_h)` if earlier.
    pub fn end_time(&self) -> f64 {
        match self.law.horizon() {
            Some(t) => (t * (1.0 - self.pt_clip)).min(self.max_time),
            None => self.max_time,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Status {
    Converged,
    SingularStall,
    HorizonReached,
    StepFailure,
    DomainViolation,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "Converged",
            Status::SingularStall => "SingularStall",
            Status::HorizonReached => "HorizonReached",
            Status::StepFailure => "StepFailure",
            Status::DomainViolation => "DomainViolation",
        }
    }

    fn from_field_error(e: &FieldError) -> Self {
        match e {
            FieldError::Singularity { .. } | FieldError::JacobianSingular => Status::SingularStall,
            FieldError::Model(_) => Status::DomainViolation,
            _ => Status::StepFailure,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One recorded state.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub z: Vector,
    pub v: f64,
    pub norm_s: f64,
    pub residuals: BlockResiduals,
    pub norm_u: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> Option<&Sample> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Sample> {
        self.samples.iter()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: Status,
    pub stop_time: f64,
    pub field_evals: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub initial_v: f64,
    pub final_v: f64,
    pub final_norm_s: f64,
    pub final_residuals: BlockResiduals,
    /// Analytic settling-time bound at `V(z₀)`; `None` for exponential laws.
    pub settling_bound: Option<f64>,
    /// `Some(stop_time ≤ bound)` for converged runs with a bound.
    pub within_bound: Option<bool>,
    /// [`verify_decay`] over the recorded trajectory.
    pub decay_violation: f64,
    /// The error behind a non-converged status, if any.
    pub detail: Option<String>,
}

/// Field value plus what it was computed from.
struct Probe {
    u: Vector,
    residual: Vector,
    v: f64,
    sigma: f64,
}

impl Derivative for Probe {
    fn derivative(&self) -> &Vector {
        &self.u
    }
}

/// Evaluates the field, mapping "already converged" to `u = 0`.
fn probe(
    model: &(impl StationarityModel + ?Sized),
    law: &DecayLaw,
    realization: &Realization,
    z: &Vector,
    t: f64,
) -> Result<Probe, FieldError> {
    match realization.evaluate(model, law, z, t) {
        Ok(e) => Ok(Probe {
            u: e.u,
            residual: e.residual,
            v: e.v,
            sigma: e.sigma,
        }),
        Err(FieldError::ConvergedAlready(v)) => Ok(Probe {
            u: Vector::zeros(z.len()),
            residual: model.residual(z)?,
            v,
            sigma: law.sigma(v, t).unwrap_or(0.0),
        }),
        Err(e) => Err(e),
    }
}

fn sample(model: &(impl StationarityModel + ?Sized), t: f64, z: &Vector, p: &Probe) -> Sample {
    Sample {
        t,
        z: z.clone(),
        v: p.v,
        norm_s: p.residual.norm(),
        residuals: BlockResiduals::from_residual(model.layout(), &p.residual),
        norm_u: p.u.norm(),
        sigma: p.sigma,
    }
}

fn min_step(t: f64) -> f64 {
    1e-14 * t.abs().max(1.0)
}

/// Integrates `ż = u(z, t)` from `z₀` at `t = 0`.
///
/// Configuration and pairing errors are returned as `Err`; anything that
/// happens during integration is reported through [`SolveReport::status`].
pub fn solve(
    model: &(impl StationarityModel + ?Sized),
    config: &SolveConfig,
    z0: &Vector,
) -> Result<(Trajectory, SolveReport), SolveError> {
    config.validate()?;
    check_dim(model, z0)?;
    config.realization.check_model(model)?;

    let evals = Cell::new(0usize);
    let law = &config.law;
    let realization = &config.realization;
    let mut f = |t: f64, z: &Vector| {
        evals.set(evals.get() + 1);
        probe(model, law, realization, z, t)
    };
    let (atol, rtol, tol) = (config.abs_tol, config.rel_tol, config.tol_stat);
    let t_end = config.end_time();

    let mut all = Vec::new();
    let mut accepted = 0usize;
    let mut rejected_steps = 0usize;
    let mut detail = None;

    let status = 'run: {
        let mut cur = match f(0.0, z0) {
            Ok(p) => p,
            Err(e) => {
                detail = Some(format!("at t = 0: {e}"));
                break 'run Status::from_field_error(&e);
            }
        };
        let mut t = 0.0;
        let mut z = z0.clone();
        all.push(sample(model, t, &z, &cur));
        if cur.residual.norm() <= tol {
            break 'run Status::Converged;
        }

        let mut h = initial_step(
            |t, y| {
                evals.set(evals.get() + 1);
                probe(model, law, realization, y, t).map(|p| p.u)
            },
            t,
            &z,
            &cur.u,
            atol,
            rtol,
            t_end,
        );
        let mut after_reject = false;
        loop {
            if accepted + rejected_steps >= config.max_steps {
                detail = Some(format!("step budget of {} exhausted at t = {t}", config.max_steps));
                break 'run Status::StepFailure;
            }
            let remaining = t_end - t;
            if remaining <= min_step(t) {
                break 'run Status::HorizonReached;
            }
            let (h_try, last_step) = if h >= remaining * (1.0 - 1e-12) {
                (remaining, true)
            } else {
                (h, false)
            };

            let step = match try_step(&mut f, t, &z, &cur.u, h_try, atol, rtol) {
                Ok(s) if s.err.is_finite() && s.y.iter().all(|x| x.is_finite()) => s,
                Ok(s) => {
                    rejected_steps += 1;
                    h = h_try
                        * if s.err.is_finite() {
                            step_factor(s.err, true)
                        } else {
                            EVAL_FAILURE_SHRINK
                        };
                    after_reject = true;
                    if h < min_step(t) {
                        detail = Some(format!("step size underflow at t = {t}"));
                        break 'run Status::StepFailure;
                    }
                    continue;
                }
                Err(e) => {
                    // a stage left the field's domain; retry smaller, and
                    // only give up once the step cannot shrink further
                    rejected_steps += 1;
                    h = h_try * EVAL_FAILURE_SHRINK;
                    after_reject = true;
                    if h < min_step(t) {
                        detail = Some(format!("at t = {t}: {e}"));
                        break 'run Status::from_field_error(&e);
                    }
                    continue;
                }
            };
            // every law makes V strictly decrease; near a finite-time collapse
            // the field is not Lipschitz and both embedded solutions can
            // overshoot the zero of S together, so the error estimate misses it
            let raises_v = step.last.v > cur.v * (1.0 + rtol);
            if step.err > 1.0 || raises_v {
                rejected_steps += 1;
                h = h_try
                    * if raises_v {
                        EVAL_FAILURE_SHRINK
                    } else {
                        step_factor(step.err, true)
                    };
                after_reject = true;
                if h < min_step(t) {
                    detail = Some(format!("step size underflow at t = {t}"));
                    break 'run Status::StepFailure;
                }
                continue;
            }

            accepted += 1;
            if step.last.residual.norm() <= tol {
                // bisect the final step for the first time the tolerance holds
                let (mut lo, mut hi) = (0.0, h_try);
                let mut best = (step.y, step.last);
                for _ in 0..EVENT_BISECTIONS {
                    if hi - lo <= EVENT_REL_TOL * (t + hi).max(1.0) {
                        break;
                    }
                    let mid = 0.5 * (lo + hi);
                    match try_step(&mut f, t, &z, &cur.u, mid, atol, rtol) {
                        Ok(s) if s.err <= 1.0 && s.last.residual.norm() <= tol => {
                            hi = mid;
                            best = (s.y, s.last);
                        }
                        Ok(_) => lo = mid,
                        Err(_) => break,
                    }
                }
                let (t_new, z_new, p_new) = (t + hi, best.0, best.1);
                all.push(sample(model, t_new, &z_new, &p_new));
                break 'run Status::Converged;
            }
            t = if last_step { t_end } else { t + h_try };
            z = step.y;
            cur = step.last;
            all.push(sample(model, t, &z, &cur));
            if last_step {
                break 'run Status::HorizonReached;
            }
            h = h_try * step_factor(step.err, after_reject);
            after_reject = false;
        }
    };

    let initial_v = all.first().map_or(f64::NAN, |s| s.v);
    let trajectory = Trajectory {
        samples: downsample(all, config.samples),
    };
    let (stop_time, final_v, final_norm_s, final_residuals) = match trajectory.last() {
        Some(b) => (b.t, b.v, b.norm_s, b.residuals),
        None => (0.0, f64::NAN, f64::NAN, BlockResiduals::default()),
    };
    let settling_bound = law.settling_bound(initial_v);
    let within_bound = match (status, settling_bound) {
        (Status::Converged, Some(b)) => Some(stop_time <= b),
        _ => None,
    };
    let decay_violation = verify_decay(model, &trajectory, law, realization);
    let report = SolveReport {
        status,
        stop_time,
        field_evals: evals.get(),
        accepted_steps: accepted,
        rejected_steps,
        initial_v,
        final_v,
        final_norm_s,
        final_residuals,
        settling_bound,
        within_bound,
        decay_violation,
        detail,
    };
    Ok((trajectory, report))
}

/// Keeps about `n` samples spaced evenly in `ln V` (evenly in index if `V`
/// did not decrease), always including the first and last.
fn downsample(all: Vec<Sample>, n: usize) -> Vec<Sample> {
    let len = all.len();
    if len <= n {
        return all;
    }
    let v0 = all[0].v;
    let v1 = all[len - 1].v;
    // index 0 is pinned: exp(ln V₀) can round below V₀ and skip it
    let mut keep = Vec::with_capacity(n);
    keep.push(0);
    if v1 > 0.0 && v0 > v1 {
        let (l0, l1) = (libm::log(v0), libm::log(v1));
        let mut i = 0;
        for k in 1..n {
            let target = libm::exp(l0 + (l1 - l0) * k as f64 / (n - 1) as f64);
            while i < len - 1 && all[i].v > target {
                i += 1;
            }
            if keep.last() != Some(&i) {
                keep.push(i);
            }
        }
    } else {
        for k in 0..n {
            let i = (k * (len - 1) + (n - 1) / 2) / (n - 1);
            if keep.last() != Some(&i) {
                keep.push(i);
            }
        }
    }
    if keep.last() != Some(&(len - 1)) {
        keep.push(len - 1);
    }
    let mut out = Vec::with_capacity(keep.len());
    let mut next = keep.iter().peekable();
    for (i, s) in all.into_iter().enumerate() {
        if next.peek() == Some(&&i) {
            out.push(s);
            next.next();
        }
    }
    out
}

/// Worst decay-law mismatch over the recorded states.
///
/// At each sample `∇Vᵀu` and `σ(V, t)` are recomputed from the model and
/// `r = (∇Vᵀu + σ) / max(1, σ)` is formed. Equality realizations (HGD, ND)
/// report `max |r|`; GD only promises `V̇ ≤ -σ` and reports `max r⁺`.
/// A sample where the field cannot be evaluated yields `+∞`.
pub fn verify_decay(
    model: &(impl StationarityModel + ?Sized),
    trajectory: &Trajectory,
    law: &DecayLaw,
    realization: &Realization,
) -> f64 {
    verify_decay_against(model, trajectory, (law, realization), (law, realization))
}

/// Like [`verify_decay`], but `u` comes from the `generator` pair while `σ`
/// and the one- or two-sidedness come from the `claimed` pair.
pub fn verify_decay_against(
    model: &(impl StationarityModel + ?Sized),
    trajectory: &Trajectory,
    generator: (&DecayLaw, &Realization),
    claimed: (&DecayLaw, &Realization),
) -> f64 {
    let mut worst: f64 = 0.0;
    for s in trajectory.iter() {
        let e = match generator.1.evaluate(model, generator.0, &s.z, s.t) {
            Ok(e) => e,
            Err(FieldError::ConvergedAlready(_)) => continue,
            Err(_) => return f64::INFINITY,
        };
        let sigma = match claimed.0.sigma(e.v, s.t) {
            Ok(x) => x,
            Err(_) => return f64::INFINITY,
        };
        let r = (e.v_dot() + sigma) / sigma.max(1.0);
        let viol = if claimed.1.enforces_equality() {
            r.abs()
        } else {
            r.max(0.0)
        };
        if !viol.is_finite() {
            return f64::INFINITY;
        }
        worst = worst.max(viol);
    }
    worst
}
