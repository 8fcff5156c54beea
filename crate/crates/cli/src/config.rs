//! Run configuration: JSON config files, command-line overrides and law
//! parameter parsing.
//!
//! Config schema (every key optional; command-line flags win):
//!
//! ```json
//! {
//!   "problem": "logsumexp",
//!   "dynamics": "hgd",
//!   "gd_m": 1.0,
//!   "law": { "kind": "finite_time", "k": 1.0, "gamma": 0.5 },
//!   "eps": 1e-6,
//!   "tol_stat": 1e-6,
//!   "rel_tol": 1e-9,
//!   "abs_tol": 1e-12,
//!   "max_time": 200.0,
//!   "pt_clip": 1e-3,
//!   "samples": 400,
//!   "max_steps": 1000000,
//!   "z0": [0.5, 0.5, 1.0],
//!   "out": "run.csv",
//!   "seed": 0
//! }
//! ```
//!
//! `problem` is either a built-in name or a full benchmark spec object
//! (see `olfkit show <name>`); `law` is either a preset tag (`exp`, `ft`,
//! `fxt`, `pt`) or a law object.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use olfkit::dynamics::{Realization, RealizationKind};
use olfkit::integrate::SolveConfig;
use olfkit::law::{DecayLaw, LawKind};
use olfkit::linalg::Vector;
use olfkit::model::StationarityModel;
use olfkit::problems::{build_model, builtin, BenchmarkSpec, BUILTIN_NAMES};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Environment variable that overrides the output root directory.
pub const OUT_DIR_ENV: &str = "OLFKIT_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dynamics {
    Hgd,
    Nd,
    Gd,
}

impl Dynamics {
    pub fn tag(&self) -> &'static str {
        match self {
            Dynamics::Hgd => "hgd",
            Dynamics::Nd => "nd",
            Dynamics::Gd => "gd",
        }
    }

    pub fn of(kind: RealizationKind) -> Self {
        match kind {
            RealizationKind::Hgd => Dynamics::Hgd,
            RealizationKind::Nd => Dynamics::Nd,
            RealizationKind::Gd { .. } => Dynamics::Gd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LawName {
    Exp,
    Ft,
    Fxt,
    Pt,
}

impl LawName {
    pub fn tag(&self) -> &'static str {
        match self {
            LawName::Exp => "exp",
            LawName::Ft => "ft",
            LawName::Fxt => "fxt",
            LawName::Pt => "pt",
        }
    }

    pub fn of(kind: &LawKind) -> Self {
        match kind {
            LawKind::Exponential { .. } => LawName::Exp,
            LawKind::FiniteTime { .. } => LawName::Ft,
            LawKind::FixedTime { .. } => LawName::Fxt,
            LawKind::PrescribedTime { .. } => LawName::Pt,
        }
    }

    fn keys(&self) -> &'static [&'static str] {
        match self {
            LawName::Exp => &["c"],
            LawName::Ft => &["k", "gamma"],
            LawName::Fxt => &["a", "b", "gamma", "delta"],
            LawName::Pt => &["mu", "T"],
        }
    }
}

fn law_values(kind: &LawKind) -> Vec<f64> {
    match *kind {
        LawKind::Exponential { c } => vec![c],
        LawKind::FiniteTime { k, gamma } => vec![k, gamma],
        LawKind::FixedTime { a, b, gamma, delta } => vec![a, b, gamma, delta],
        LawKind::PrescribedTime { mu, horizon } => vec![mu, horizon],
    }
}

/// Builds a law from `key=value` parameters. Keys left out fall back to
/// `preset` when it belongs to the same family.
pub fn law_from_params(name: LawName, params: &[String], preset: Option<LawKind>) -> Result<DecayLaw> {
    let tag = name.tag();
    let keys = name.keys();
    let mut given: BTreeMap<&str, f64> = BTreeMap::new();
    for p in params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| anyhow!("law parameter `{p}` is not of the form key=value"))?;
        let (k, v) = (k.trim(), v.trim());
        if !keys.contains(&k) {
            bail!("law {tag} takes parameters {}; got `{k}`", keys.join(", "));
        }
        let x: f64 = v
            .parse()
            .map_err(|_| anyhow!("law parameter `{k}`: `{v}` is not a number"))?;
        if given.insert(k, x).is_some() {
            bail!("law parameter `{k}` given twice");
        }
    }
    let defaults = preset.filter(|p| LawName::of(p) == name).map(|p| law_values(&p));
    let mut vals = Vec::with_capacity(keys.len());
    for (i, key) in keys.iter().enumerate() {
        let v = given
            .get(key)
            .copied()
            .or_else(|| defaults.as_ref().map(|d| d[i]))
            .ok_or_else(|| anyhow!("law {tag} needs `{key}=<value>` (no preset for this problem)"))?;
        vals.push(v);
    }
    let kind = match name {
        LawName::Exp => LawKind::Exponential { c: vals[0] },
        LawName::Ft => LawKind::FiniteTime {
            k: vals[0],
            gamma: vals[1],
        },
        LawName::Fxt => LawKind::FixedTime {
            a: vals[0],
            b: vals[1],
            gamma: vals[2],
            delta: vals[3],
        },
        LawName::Pt => LawKind::PrescribedTime {
            mu: vals[0],
            horizon: vals[1],
        },
    };
    DecayLaw::new(kind).map_err(|e| anyhow!("law {tag}: {e}"))
}

/// Realization for `dynamics`; GD takes `m` from `gd_m` or the spec.
pub fn realization_for(dynamics: Dynamics, gd_m: Option<f64>, spec: &BenchmarkSpec) -> Result<Realization> {
    let kind = match dynamics {
        Dynamics::Hgd => RealizationKind::Hgd,
        Dynamics::Nd => RealizationKind::Nd,
        Dynamics::Gd => {
            let m = gd_m.or(spec.gd_m).ok_or_else(|| {
                anyhow!(
                    "gd dynamics needs a monotonicity constant: pass --gd-m (problem `{}` has no default)",
                    spec.name
                )
            })?;
            RealizationKind::Gd { m }
        }
    };
    Realization::new(kind).map_err(|e| anyhow!("dynamics {}: {e}", dynamics.tag()))
}

/// Solver tolerances shared by `run` and `bench`.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct SolverArgs {
    /// Fischer-Burmeister smoothing for KKT encodings
    #[arg(long)]
    pub eps: Option<f64>,
    /// Stop once ‖S(z)‖ drops to this value
    #[arg(long)]
    pub tol_stat: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Simulated-time budget
    #[arg(long)]
    pub max_time: Option<f64>,
    /// Prescribed-time runs stop at T(1 - pt_clip)
    #[arg(long)]
    pub pt_clip: Option<f64>,
    /// Number of recorded trajectory samples
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub max_steps: Option<usize>,
}

impl SolverArgs {
    /// Fills unset flags from `file`.
    fn or(&self, file: &ConfigFile) -> Self {
        Self {
            eps: self.eps.or(file.eps),
            tol_stat: self.tol_stat.or(file.tol_stat),
            rel_tol: self.rel_tol.or(file.rel_tol),
            abs_tol: self.abs_tol.or(file.abs_tol),
            max_time: self.max_time.or(file.max_time),
            pt_clip: self.pt_clip.or(file.pt_clip),
            samples: self.samples.or(file.samples),
            max_steps: self.max_steps.or(file.max_steps),
        }
    }

    /// Overrides the spec's smoothing, if set.
    pub fn apply_to_spec(&self, spec: &mut BenchmarkSpec) -> Result<()> {
        if let Some(eps) = self.eps {
            if !(eps > 0.0 && eps.is_finite()) {
                bail!("eps must be strictly positive and finite, got {eps}");
            }
            spec.eps = Some(eps);
        }
        Ok(())
    }

    pub fn solve_config(&self, law: DecayLaw, realization: Realization) -> Result<SolveConfig> {
        let mut cfg = SolveConfig::new(law, realization);
        if let Some(v) = self.tol_stat {
            cfg.tol_stat = v;
        }
        if let Some(v) = self.rel_tol {
            cfg.rel_tol = v;
        }
        if let Some(v) = self.abs_tol {
            cfg.abs_tol = v;
        }
        if let Some(v) = self.max_time {
            cfg.max_time = v;
        }
        if let Some(v) = self.pt_clip {
            cfg.pt_clip = v;
        }
        if let Some(v) = self.samples {
            cfg.samples = v;
        }
        if let Some(v) = self.max_steps {
            cfg.max_steps = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Contents of a JSON config file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub problem: Option<Value>,
    pub dynamics: Option<Dynamics>,
    pub gd_m: Option<f64>,
    pub law: Option<Value>,
    pub eps: Option<f64>,
    pub tol_stat: Option<f64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_time: Option<f64>,
    pub pt_clip: Option<f64>,
    pub samples: Option<usize>,
    pub max_steps: Option<usize>,
    pub z0: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Deserializes `value`, naming the offending key on failure.
fn from_value<T: DeserializeOwned>(value: Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            anyhow!("key `{prefix}`: {}", e.inner())
        } else {
            anyhow!("key `{prefix}.{path}`: {}", e.inner())
        }
    })
}

pub fn parse_config(text: &str) -> Result<ConfigFile> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| anyhow!("key `{}`: {}", e.path(), e.inner()))
}

pub fn load_config(path: &Path) -> Result<ConfigFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    parse_config(&text).with_context(|| format!("invalid config {}", path.display()))
}

/// Looks up a built-in benchmark, listing the valid names on failure.
pub fn builtin_spec(name: &str) -> Result<BenchmarkSpec> {
    builtin(name).ok_or_else(|| anyhow!("unknown problem `{name}`; built-ins are {}", BUILTIN_NAMES.join(", ")))
}

fn problem_from_value(value: Value) -> Result<BenchmarkSpec> {
    match value {
        Value::String(name) => builtin_spec(&name),
        v @ Value::Object(_) => from_value(v, "problem"),
        _ => bail!("key `problem`: expected a built-in name or a spec object"),
    }
}

fn law_from_value(value: Value, spec: &BenchmarkSpec) -> Result<DecayLaw> {
    match value {
        Value::String(tag) => {
            let kind = spec
                .laws
                .get(&tag)
                .ok_or_else(|| anyhow!("key `law`: unknown preset `{tag}`, expected exp, ft, fxt or pt"))?;
            DecayLaw::new(kind).map_err(|e| anyhow!("key `law`: {e}"))
        }
        v => {
            let kind: LawKind = from_value(v, "law")?;
            DecayLaw::new(kind).map_err(|e| anyhow!("key `law`: {e}"))
        }
    }
}

/// Root directory for outputs: `$OLFKIT_OUT_DIR` or the working directory.
pub fn out_root() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Resolves a relative output path against [`out_root`].
pub fn resolve_out(path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        out_root().join(path)
    }
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct RunArgs {
    /// Built-in problem name (see `olfkit list`)
    #[arg(long)]
    pub problem: Option<String>,
    /// JSON config file
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub dynamics: Option<Dynamics>,
    /// Monotonicity constant for gd dynamics
    #[arg(long)]
    pub gd_m: Option<f64>,
    /// Decay law; parameters follow as key=value (exp: c; ft: k gamma;
    /// fxt: a b gamma delta; pt: mu T)
    #[arg(long, value_enum)]
    pub law: Option<LawName>,
    /// Law parameters as key=value
    pub params: Vec<String>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Output CSV path (relative paths go under $OLFKIT_OUT_DIR)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for the randomized Jacobian check
    #[arg(long)]
    pub seed: Option<u64>,
}

/// A fully resolved single run.
pub struct ResolvedRun {
    pub spec: BenchmarkSpec,
    pub model: Box<dyn StationarityModel>,
    pub config: SolveConfig,
    pub dynamics: Dynamics,
    pub z0: Vector,
    pub out: PathBuf,
    pub seed: u64,
}

pub fn resolve_run(args: &RunArgs) -> Result<ResolvedRun> {
    let file = match &args.config {
        Some(path) => load_config(path)?,
        None => ConfigFile::default(),
    };
    let mut spec = match (&args.problem, file.problem.clone()) {
        (Some(name), _) => builtin_spec(name)?,
        (None, Some(v)) => problem_from_value(v)?,
        (None, None) => bail!("no problem given: pass --problem <name> or a config with a `problem` key"),
    };
    let solver = args.solver.or(&file);
    solver.apply_to_spec(&mut spec)?;

    if !args.params.is_empty() && args.law.is_none() {
        bail!("law parameters {:?} given without --law", args.params);
    }
    let law = match (args.law, file.law.clone()) {
        (Some(name), _) => law_from_params(name, &args.params, spec.laws.get(name.tag()))?,
        (None, Some(v)) => law_from_value(v, &spec)?,
        (None, None) => DecayLaw::new(spec.laws.exp).map_err(|e| anyhow!("exp preset: {e}"))?,
    };
    let dynamics = args.dynamics.or(file.dynamics).unwrap_or(Dynamics::Hgd);
    let realization = realization_for(dynamics, args.gd_m.or(file.gd_m), &spec)?;
    let config = solver.solve_config(law, realization)?;

    if let Some(z0) = &file.z0 {
        if z0.len() != spec.state_dim {
            bail!(
                "key `z0`: problem `{}` has state dimension {}, got {} values",
                spec.name,
                spec.state_dim,
                z0.len()
            );
        }
        spec.z0 = z0.clone();
    }
    let model = build_model(&spec).with_context(|| format!("building problem `{}`", spec.name))?;
    let out = match args.out.clone().or(file.out.clone()) {
        Some(p) => resolve_out(&p),
        None => resolve_out(Path::new(&format!(
            "{}-{}-{}.csv",
            spec.name,
            dynamics.tag(),
            config.law.tag()
        ))),
    };
    Ok(ResolvedRun {
        z0: spec.z0_vector(),
        spec,
        model,
        config,
        dynamics,
        out,
        seed: args.seed.or(file.seed).unwrap_or(0),
    })
}
