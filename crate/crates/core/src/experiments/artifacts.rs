use super::ExperimentError;
use crate::integrator::{DissipatorConvention, Mode};
use crate::observables::{OccupationProfile, TraceDistanceSample};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Normalized-block distances of the target node at `t_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateDistances {
    pub to_ground: Option<f64>,
    pub to_excited: Option<f64>,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub num_nodes: usize,
    pub target_node: usize,
    pub mode: Mode,
    pub convention: DissipatorConvention,
    pub eta: f64,
    pub samples: usize,
    pub t_max: f64,
    pub p_max: f64,
    pub v_n: f64,
    pub efficient: bool,
    pub distances_at_t_max: StateDistances,
    pub max_trace_defect: f64,
    pub max_hermiticity_defect: f64,
    pub min_eigenvalue: f64,
}

pub fn occupation_csv(profile: &OccupationProfile) -> String {
    let n = profile.probabilities.len();
    let mut out = String::with_capacity(profile.times.len() * (n + 1) * 24);
    out.push('t');
    for j in 1..=n {
        let _ = write!(out, ",P_{j}");
    }
    out.push('\n');
    for (i, t) in profile.times.iter().enumerate() {
        out.push_str(&format_float(*t));
        for p in &profile.probabilities {
            out.push(',');
            out.push_str(&format_float(p[i]));
        }
        out.push('\n');
    }
    out
}

fn opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

/// `t,T_ground,T_excited,T_ground_raw,T_excited_raw`; normalized cells are
/// empty where the node is essentially unoccupied.
pub(crate) fn trace_distance_csv(to_ground: &[TraceDistanceSample], to_excited: &[TraceDistanceSample]) -> String {
    let mut out = String::from("t,T_ground,T_excited,T_ground_raw,T_excited_raw\n");
    for (g, e) in to_ground.iter().zip(to_excited) {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            format_float(g.t),
            opt(g.normalized),
            opt(e.normalized),
            format_float(g.raw),
            format_float(e.raw)
        );
    }
    out
}

/// Parses an occupation CSV written by [`occupation_csv`].
pub fn read_occupation_csv(path: &Path) -> Result<OccupationProfile, ExperimentError> {
    let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let bad = |message: String| ExperimentError::Artifact {
        path: path.to_path_buf(),
        message,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.first() != Some(&"t") || columns.len() < 3 {
        return Err(bad(format!("unexpected header `{header}`")));
    }
    let n = columns.len() - 1;
    let mut times = Vec::new();
    let mut probabilities = vec![Vec::new(); n];
    for (row, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != n + 1 {
            return Err(bad(format!("row {} has {} cells, expected {}", row + 2, cells.len(), n + 1)));
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("row {}: {e}", row + 2)));
        times.push(parse(cells[0])?);
        for (j, cell) in cells[1..].iter().enumerate() {
            probabilities[j].push(parse(cell)?);
        }
    }
    Ok(OccupationProfile { times, probabilities })
}

/// Writes through a sibling temporary file and renames it into place.
pub(crate) fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), ExperimentError> {
    let io = |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, contents).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ExperimentError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
