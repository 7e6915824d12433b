//! Input file formats owned by the command line and the report sink.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use bendlab::lam2::{Arc2, Leaf2};
use bendlab::pleat::BendSide;
use bendlab::seqlab::PeriodicPleating;

/// Environment variable naming the directory reports go to when no `--out`
/// is given.
pub const REPORT_DIR_VAR: &str = "BENDLAB_REPORT_DIR";

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))
}

/// An arc record. Endpoints are either polar pairs `[r, φ]`, standing for
/// `(cosh r, sinh r cos φ, sinh r sin φ, 0)`, or hyperboloid coordinates
/// `[t, x, y, z]` with `z = 0`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ArcRecord {
    Polar { from: [f64; 2], to: [f64; 2] },
    Hyperboloid(Arc2),
}

impl ArcRecord {
    pub fn arc(&self) -> Result<Arc2> {
        match self {
            ArcRecord::Polar { from, to } => Ok(Arc2::from_polar(from[0], from[1], to[0], to[1])?),
            ArcRecord::Hyperboloid(a) => Ok(*a),
        }
    }
}

pub fn read_arcs(path: &Path) -> Result<Vec<Arc2>> {
    let raw: Vec<ArcRecord> = read_json(path)?;
    raw.iter()
        .enumerate()
        .map(|(i, a)| a.arc().with_context(|| format!("arc {i} of {}", path.display())))
        .collect()
}

#[derive(Debug, Deserialize)]
pub struct PeriodicInstance {
    pub epsilon: f64,
    pub period: f64,
    pub side: BendSide,
    pub seeds: Vec<Leaf2>,
}

#[derive(Debug, Deserialize)]
pub struct QuasiGeodesicInput {
    pub instances: Vec<PeriodicInstance>,
}

impl QuasiGeodesicInput {
    pub fn pleatings(self) -> Result<Vec<(f64, PeriodicPleating)>> {
        self.instances
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                let pp = PeriodicPleating::new(p.period, p.seeds, p.side)
                    .map_err(|e| anyhow::anyhow!("seqlab: {e}"))
                    .with_context(|| format!("instance {i}"))?;
                Ok((p.epsilon, pp))
            })
            .collect()
    }
}

/// Where a report goes: the explicit path, else `$BENDLAB_REPORT_DIR/<name>`,
/// else standard output.
pub fn destination(out: Option<&Path>, name: &str) -> Option<PathBuf> {
    out.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(REPORT_DIR_VAR).map(|d| PathBuf::from(d).join(name)))
}

pub fn emit(out: Option<&Path>, name: &str, body: &str) -> Result<()> {
    match destination(out, name) {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            }
            fs::write(&path, body).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
            Ok(())
        }
    }
}

pub fn emit_json<T: Serialize>(out: Option<&Path>, name: &str, report: &T) -> Result<()> {
    let body = serde_json::to_string_pretty(report)? + "\n";
    emit(out, name, &body)
}
