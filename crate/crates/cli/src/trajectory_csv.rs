//! Trajectory CSV files.
//!
//! Layout: `#`-prefixed metadata lines, then one header row and one row per
//! sample. Every number is written with 17 significant digits so the file
//! round-trips bit for bit.
//!
//! ```text
//! # olfkit-trajectory v1
//! # spec: {...benchmark spec as JSON...}
//! # law: {"kind":"finite_time","k":1.0,"gamma":0.5}
//! # realization: {"kind":"hgd"}
//! # status: Converged
//! # stop_time: 3.1234567890123457e0
//! t,V,normS,res_stat,res_eq,res_ineq,normU,sigma,z_0,z_1,...
//! ```

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use olfkit::dynamics::RealizationKind;
use olfkit::integrate::{Sample, Status, Trajectory};
use olfkit::law::LawKind;
use olfkit::linalg::Vector;
use olfkit::model::BlockResiduals;
use olfkit::problems::BenchmarkSpec;

pub const SCHEMA: &str = "olfkit-trajectory v1";
pub const COLUMNS: [&str; 8] = ["t", "V", "normS", "res_stat", "res_eq", "res_ineq", "normU", "sigma"];

/// Metadata stored ahead of the samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta {
    pub spec: BenchmarkSpec,
    pub law: LawKind,
    pub realization: RealizationKind,
    pub status: String,
    pub stop_time: f64,
}

impl TrajectoryMeta {
    pub fn new(
        spec: BenchmarkSpec,
        law: LawKind,
        realization: RealizationKind,
        status: Status,
        stop_time: f64,
    ) -> Self {
        Self {
            spec,
            law,
            realization,
            status: status.as_str().to_string(),
            stop_time,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryFile {
    pub meta: TrajectoryMeta,
    pub trajectory: Trajectory,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trajectory<W: Write>(mut w: W, meta: &TrajectoryMeta, traj: &Trajectory) -> Result<()> {
    writeln!(w, "# {SCHEMA}")?;
    writeln!(w, "# spec: {}", serde_json::to_string(&meta.spec)?)?;
    writeln!(w, "# law: {}", serde_json::to_string(&meta.law)?)?;
    writeln!(w, "# realization: {}", serde_json::to_string(&meta.realization)?)?;
    writeln!(w, "# status: {}", meta.status)?;
    writeln!(w, "# stop_time: {}", num(meta.stop_time))?;
    let mut header: Vec<String> = COLUMNS.iter().map(|c| c.to_string()).collect();
    header.extend((0..meta.spec.state_dim).map(|i| format!("z_{i}")));
    writeln!(w, "{}", header.join(","))?;
    for s in traj.iter() {
        let mut row = vec![
            num(s.t),
            num(s.v),
            num(s.norm_s),
            num(s.residuals.stationarity),
            num(s.residuals.equality),
            num(s.residuals.inequality),
            num(s.norm_u),
            num(s.sigma),
        ];
        row.extend(s.z.iter().map(|&x| num(x)));
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes to `path`, creating parent directories.
pub fn save_trajectory(path: &Path, meta: &TrajectoryMeta, traj: &Trajectory) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_trajectory(BufWriter::new(f), meta, traj).with_context(|| format!("writing {}", path.display()))
}

pub fn read_trajectory<R: BufRead>(r: R) -> Result<TrajectoryFile> {
    let mut lines = r.lines().enumerate();
    match lines.next() {
        Some((_, line)) => {
            let line = line?;
            let found = line.strip_prefix('#').map(str::trim);
            if found != Some(SCHEMA) {
                bail!("line 1: expected schema line `# {SCHEMA}`, found `{line}`");
            }
        }
        None => bail!("empty trajectory file"),
    }
    let mut meta: BTreeMap<String, String> = BTreeMap::new();
    let header = loop {
        let (i, line) = lines
            .next()
            .ok_or_else(|| anyhow!("file ends before the column header"))?;
        let line = line?;
        let Some(rest) = line.strip_prefix('#') else {
            break (i + 1, line);
        };
        let rest = rest.trim();
        let (k, v) = rest
            .split_once(": ")
            .ok_or_else(|| anyhow!("line {}: malformed metadata `{rest}`", i + 1))?;
        meta.insert(k.to_string(), v.to_string());
    };
    let field = |k: &str| meta.get(k).ok_or_else(|| anyhow!("missing metadata `{k}`"));
    let spec: BenchmarkSpec = serde_json::from_str(field("spec")?).context("metadata `spec`")?;
    let law: LawKind = serde_json::from_str(field("law")?).context("metadata `law`")?;
    let realization: RealizationKind = serde_json::from_str(field("realization")?).context("metadata `realization`")?;
    let status = field("status")?.clone();
    let stop_time: f64 = field("stop_time")?
        .parse()
        .map_err(|_| anyhow!("metadata `stop_time` is not a number"))?;

    let (header_line, header) = header;
    let cols: Vec<&str> = header.split(',').collect();
    let n = spec.state_dim;
    let expected: Vec<String> = COLUMNS
        .iter()
        .map(|c| c.to_string())
        .chain((0..n).map(|i| format!("z_{i}")))
        .collect();
    if cols != expected {
        bail!(
            "line {header_line}: column header does not match schema for state dimension {n}, expected `{}`",
            expected.join(",")
        );
    }

    let mut samples = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .enumerate()
            .map(|(j, s)| {
                s.trim().parse::<f64>().map_err(|_| {
                    anyhow!(
                        "line {}: column `{}` value `{s}` is not a number",
                        i + 1,
                        expected.get(j).map_or("?", |c| c.as_str())
                    )
                })
            })
            .collect::<Result<_>>()?;
        if vals.len() != expected.len() {
            bail!(
                "line {}: expected {} columns, found {}",
                i + 1,
                expected.len(),
                vals.len()
            );
        }
        samples.push(Sample {
            t: vals[0],
            v: vals[1],
            norm_s: vals[2],
            residuals: BlockResiduals {
                stationarity: vals[3],
                equality: vals[4],
                inequality: vals[5],
            },
            norm_u: vals[6],
            sigma: vals[7],
            z: Vector::from_row_slice(&vals[8..]),
        });
    }
    Ok(TrajectoryFile {
        meta: TrajectoryMeta {
            spec,
            law,
            realization,
            status,
            stop_time,
        },
        trajectory: Trajectory { samples },
    })
}

pub fn load_trajectory(path: &Path) -> Result<TrajectoryFile> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_trajectory(BufReader::new(f)).with_context(|| format!("reading trajectory {}", path.display()))
}
