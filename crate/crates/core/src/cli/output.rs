//! Result files. Every file starts with the same provenance header.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::diagnostics::CheckReport;
use crate::dynsys::energy;
use crate::error::{Error, Result};
use crate::kprofile::{KProfile, ProfileSummary};
use crate::params::ProblemParams;
use crate::shooting::{Outcome, ShotResult};
use crate::sweep::{BifurcationDiagram, FoldPoint, Regime, RootReport};

use super::config::RunConfig;

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Regime of the profile against `ell*`, as printed in headers.
pub fn regime_declaration(params: &ProblemParams, profile: &KProfile) -> String {
    match (profile.ell(), Regime::declare(params, profile.ell())) {
        (Some(ell), Some(r)) => format!("{} (ell = {ell}, ell* = {})", r.label(), params.ell_star),
        _ => format!("undeclared (no leading power, ell* = {})", params.ell_star),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_sha256: String,
    pub regime: String,
}

impl Meta {
    pub fn new(config: &RunConfig, params: &ProblemParams, profile: &KProfile) -> Self {
        Meta { tool: TOOL, version: VERSION, config_sha256: config.hash(), regime: regime_declaration(params, profile) }
    }

    fn header_lines(&self) -> String {
        format!(
            "# {} {}\n# config_sha256 {}\n# regime {}\n",
            self.tool, self.version, self.config_sha256, self.regime
        )
    }
}

pub fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("cannot create {}: {e}", dir.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn num(v: Option<f64>) -> String {
    v.map(|v| format!("{v:e}")).unwrap_or_default()
}

fn write_csv(path: &Path, meta: &Meta, header: &[&str], rows: Vec<Vec<String>>) -> Result<PathBuf> {
    let mut out = create(path)?;
    out.write_all(meta.header_lines().as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(path.to_path_buf())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<PathBuf> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Io(e.to_string()))?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(path.to_path_buf())
}

fn shot_row(shot: &ShotResult) -> Vec<String> {
    let (t, r, y0) = match shot.outcome {
        Outcome::Crossing { t, r, y_at_zero } => (Some(t), Some(r), Some(y_at_zero)),
        _ => (None, None, None),
    };
    vec![format!("{:e}", shot.d), shot.outcome.label().into(), num(t), num(r), num(y0)]
}

pub fn write_shots_csv(path: &Path, meta: &Meta, shots: &[&ShotResult]) -> Result<PathBuf> {
    write_csv(path, meta, &["d", "outcome", "T", "R", "y_at_zero"], shots.iter().map(|s| shot_row(s)).collect())
}

/// Samples of the trajectory in absolute coordinates.
pub fn write_trajectory_csv(path: &Path, meta: &Meta, params: &ProblemParams, profile: &KProfile, shot: &ShotResult) -> Result<PathBuf> {
    let traj = shot.trajectory.as_ref().ok_or_else(|| Error::Argument("shot kept no trajectory".into()))?;
    let rows = traj
        .samples
        .iter()
        .map(|s| {
            let (k, dk) = profile.eval_t(s.t);
            let h = energy(params, k, s.x, s.y);
            [s.t, s.x, s.y, h, k, dk].iter().map(|v| format!("{v:e}")).collect()
        })
        .collect();
    write_csv(path, meta, &["t", "x", "y", "H", "K", "dKdt"], rows)
}

pub fn write_diagram_csv(path: &Path, meta: &Meta, diagram: &BifurcationDiagram) -> Result<PathBuf> {
    let rows = diagram
        .points
        .iter()
        .map(|p| match &p.shot {
            Some(shot) => {
                let row = shot_row(shot);
                vec![row[0].clone(), row[2].clone(), row[3].clone(), row[1].clone(), String::new()]
            }
            None => vec![format!("{:e}", p.d), String::new(), String::new(), "failed".into(), p.failure.clone().unwrap_or_default()],
        })
        .collect();
    write_csv(path, meta, &["d", "T", "R", "outcome", "failure"], rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct ShotJson {
    pub d: f64,
    #[serde(flatten)]
    pub outcome: Outcome,
    pub decreasing: bool,
    pub samples: usize,
}

impl ShotJson {
    pub fn new(shot: &ShotResult) -> Self {
        ShotJson {
            d: shot.d,
            outcome: shot.outcome,
            decreasing: shot.decreasing,
            samples: shot.trajectory.as_ref().map_or(0, |t| t.samples.len()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegimeJson {
    pub declared: Option<Regime>,
    pub ell: Option<f64>,
    pub ell_star: f64,
    pub tail_consistent: Option<bool>,
}

/// Summary document shared by all commands; unused parts stay `null`.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub meta: Meta,
    pub config: RunConfig,
    pub params: ProblemParams,
    pub profile: ProfileSummary,
    pub regime: RegimeJson,
    #[serde(rename = "R0")]
    pub r0: Option<f64>,
    pub d0: Option<f64>,
    pub fold_on_boundary: Option<bool>,
    pub tail_slope: Option<f64>,
    pub failed_points: usize,
    pub roots: Option<RootReport>,
    pub shot: Option<ShotJson>,
    pub diagnostics: Vec<CheckReport>,
}

impl Summary {
    pub fn new(meta: Meta, config: &RunConfig, params: &ProblemParams, profile: &KProfile) -> Self {
        let ell = profile.ell();
        Summary {
            meta,
            config: config.clone(),
            params: *params,
            profile: profile.summary(),
            regime: RegimeJson { declared: Regime::declare(params, ell), ell, ell_star: params.ell_star, tail_consistent: None },
            r0: None,
            d0: None,
            fold_on_boundary: None,
            tail_slope: None,
            failed_points: 0,
            roots: None,
            shot: None,
            diagnostics: Vec::new(),
        }
    }

    pub fn with_diagram(mut self, diagram: &BifurcationDiagram, fold: Option<FoldPoint>) -> Self {
        self.regime.tail_consistent = diagram.regime_consistent;
        self.tail_slope = diagram.tail.slope;
        self.failed_points = diagram.points.iter().filter(|p| p.shot.is_none()).count();
        if let Some(f) = fold {
            self.r0 = Some(f.r0);
            self.d0 = Some(f.d0);
            self.fold_on_boundary = Some(f.boundary);
        }
        self
    }
}
