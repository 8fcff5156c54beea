//! Decay-law templates `σ(V, t)`.
//!
//! A feedback that enforces `V̇ = -σ(V, t)` (or `≤`) inherits the temporal
//! behaviour of the chosen template:
//!
//! | law            | `σ(V, t)`                 | settling bound                         |
//! |----------------|---------------------------|----------------------------------------|
//! | exponential    | `c·V`                     | none (asymptotic)                      |
//! | finite-time    | `k·V^γ`, `0 < γ < 1`      | `V₀^{1-γ} / (k(1-γ))`                  |
//! | fixed-time     | `a·V^γ + b·V^δ`, `γ<1<δ`  | `1/(a(1-γ)) + 1/(b(δ-1))`              |
//! | prescribed-time| `μ·V / (T - t)`, `t < T`  | `T`                                    |
//!
//! The prescribed-time form is written with a single gain `μ`; the
//! `c·T/(T - t)` parameterization maps onto it through `μ = c·T`.

use core::fmt;

/// Errors from constructing or evaluating a [`DecayLaw`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LawError {
    #[error("{name} must be strictly positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must lie in (0, 1), got {value}")]
    ExponentOutOfUnitInterval { name: &'static str, value: f64 },
    #[error("{name} must be greater than 1, got {value}")]
    ExponentNotAboveOne { name: &'static str, value: f64 },
    #[error("prescribed-time law evaluated at t = {t}, horizon is T = {horizon}")]
    HorizonExceeded { t: f64, horizon: f64 },
    #[error("Lyapunov value must be finite and nonnegative, got {0}")]
    NegativeValue(f64),
}

/// Raw law parameters. Use [`DecayLaw`] for a validated law.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum LawKind {
    /// `σ = c·V`.
    Exponential { c: f64 },
    /// `σ = k·V^γ`.
    FiniteTime { k: f64, gamma: f64 },
    /// `σ = a·V^γ + b·V^δ`.
    FixedTime { a: f64, b: f64, gamma: f64, delta: f64 },
    /// `σ = μ·V / (T - t)`.
    PrescribedTime { mu: f64, horizon: f64 },
}

/// A validated decay law.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "LawKind", into = "LawKind"))]
pub struct DecayLaw(LawKind);

fn positive(name: &'static str, value: f64) -> Result<(), LawError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(LawError::NonPositive { name, value })
    }
}

fn unit_exponent(name: &'static str, value: f64) -> Result<(), LawError> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(LawError::ExponentOutOfUnitInterval { name, value })
    }
}

/// `V^p` through `exp(p·ln V)`, with `0^p = 0`.
#[inline]
fn pow(v: f64, p: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        libm::exp(p * libm::log(v))
    }
}

impl DecayLaw {
    pub fn exponential(c: f64) -> Result<Self, LawError> {
        Self::new(LawKind::Exponential { c })
    }

    pub fn finite_time(k: f64, gamma: f64) -> Result<Self, LawError> {
        Self::new(LawKind::FiniteTime { k, gamma })
    }

    pub fn fixed_time(a: f64, b: f64, gamma: f64, delta: f64) -> Result<Self, LawError> {
        Self::new(LawKind::FixedTime { a, b, gamma, delta })
    }

    pub fn prescribed_time(mu: f64, horizon: f64) -> Result<Self, LawError> {
        Self::new(LawKind::PrescribedTime { mu, horizon })
    }

    /// Validates `kind` and wraps it.
    pub fn new(kind: LawKind) -> Result<Self, LawError> {
        match kind {
            LawKind::Exponential { c } => positive("c", c)?,
            LawKind::FiniteTime { k, gamma } => {
                positive("k", k)?;
                unit_exponent("gamma", gamma)?;
            }
            LawKind::FixedTime { a, b, gamma, delta } => {
                positive("a", a)?;
                positive("b", b)?;
                unit_exponent("gamma", gamma)?;
                if !(delta > 1.0 && delta.is_finite()) {
                    return Err(LawError::ExponentNotAboveOne {
                        name: "delta",
                        value: delta,
                    });
                }
            }
            LawKind::PrescribedTime { mu, horizon } => {
                positive("mu", mu)?;
                positive("T", horizon)?;
            }
        }
        Ok(Self(kind))
    }

    pub fn kind(&self) -> LawKind {
        self.0
    }

    /// Short tag used in file names and reports.
    pub fn tag(&self) -> &'static str {
        match self.0 {
            LawKind::Exponential { .. } => "exp",
            LawKind::FiniteTime { .. } => "ft",
            LawKind::FixedTime { .. } => "fxt",
            LawKind::PrescribedTime { .. } => "pt",
        }
    }

    /// Prescribed horizon `T`, if this is a prescribed-time law.
    pub fn horizon(&self) -> Option<f64> {
        match self.0 {
            LawKind::PrescribedTime { horizon, .. } => Some(horizon),
            _ => None,
        }
    }

    /// Evaluates `σ(V, t)`.
    pub fn sigma(&self, v: f64, t: f64) -> Result<f64, LawError> {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(LawError::NegativeValue(v));
        }
        if let LawKind::PrescribedTime { horizon, .. } = self.0 {
            if !(t < horizon) {
                return Err(LawError::HorizonExceeded { t, horizon });
            }
        }
        if v == 0.0 {
            return Ok(0.0);
        }
        Ok(match self.0 {
            LawKind::Exponential { c } => c * v,
            LawKind::FiniteTime { k, gamma } => k * pow(v, gamma),
            LawKind::FixedTime { a, b, gamma, delta } => a * pow(v, gamma) + b * pow(v, delta),
            LawKind::PrescribedTime { mu, horizon } => mu * v / (horizon - t),
        })
    }

    /// Analytic upper bound on the time for `V` to reach zero from `v0`
    /// under `V̇ ≤ -σ(V, t)`. `None` for the exponential law.
    pub fn settling_bound(&self, v0: f64) -> Option<f64> {
        match self.0 {
            LawKind::Exponential { .. } => None,
            LawKind::FiniteTime { k, gamma } => Some(pow(v0.max(0.0), 1.0 - gamma) / (k * (1.0 - gamma))),
            LawKind::FixedTime { a, b, gamma, delta } => Some(1.0 / (a * (1.0 - gamma)) + 1.0 / (b * (delta - 1.0))),
            LawKind::PrescribedTime { horizon, .. } => Some(horizon),
        }
    }
}

impl TryFrom<LawKind> for DecayLaw {
    type Error = LawError;

    fn try_from(kind: LawKind) -> Result<Self, Self::Error> {
        Self::new(kind)
    }
}

impl From<DecayLaw> for LawKind {
    fn from(law: DecayLaw) -> Self {
        law.0
    }
}

impl fmt::Display for DecayLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            LawKind::Exponential { c } => write!(f, "exp(c={c})"),
            LawKind::FiniteTime { k, gamma } => write!(f, "ft(k={k}, gamma={gamma})"),
            LawKind::FixedTime { a, b, gamma, delta } => {
                write!(f, "fxt(a={a}, b={b}, gamma={gamma}, delta={delta})")
            }
            LawKind::PrescribedTime { mu, horizon } => write!(f, "pt(mu={mu}, T={horizon})"),
        }
    }
}
