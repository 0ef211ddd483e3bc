//! Occupation probabilities, trace distances and end-node arrival summaries.

use crate::integrator::Trajectory;
use crate::model::{hermiticity_defect, hermitian_eigenvalues, Block, LatticeState};
use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

/// Largest Hermiticity defect accepted by [`trace_distance`].
pub const HERMITIAN_INPUT_TOLERANCE: f64 = 1e-8;
/// Below this end-node trace the normalized block is undefined.
pub const NORMALIZATION_FLOOR: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObservableError {
    #[error("trace distance needs Hermitian inputs (defect {0:e})")]
    NotHermitian(f64),
}

/// `P_j = |Tr ρ_j|` for 1-based node `j`.
///
/// Panics if `node` is outside `1..=N`.
pub fn occupation(state: &LatticeState, node: usize) -> f64 {
    assert!(
        (1..=state.num_nodes()).contains(&node),
        "node {node} outside 1..={}",
        state.num_nodes()
    );
    state.block(node).trace().norm()
}

/// `P[j][sample]`, node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationProfile {
    pub times: Vec<f64>,
    pub probabilities: Vec<Vec<f64>>,
}

impl OccupationProfile {
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        let n = traj.num_nodes();
        let probabilities = (1..=n)
            .map(|j| traj.states.iter().map(|s| occupation(s, j)).collect())
            .collect();
        Self {
            times: traj.times.clone(),
            probabilities,
        }
    }

    /// Series for 1-based node `j`.
    pub fn node(&self, j: usize) -> &[f64] {
        &self.probabilities[j - 1]
    }

    pub fn column_sum(&self, sample: usize) -> f64 {
        self.probabilities.iter().map(|p| p[sample]).sum()
    }
}

/// `½ Σ|λ|` over the eigenvalues of `a − b`.
pub fn trace_distance(a: &Block, b: &Block) -> Result<f64, ObservableError> {
    let defect = hermiticity_defect(a).max(hermiticity_defect(b));
    if defect > HERMITIAN_INPUT_TOLERANCE {
        return Err(ObservableError::NotHermitian(defect));
    }
    let [lo, hi] = hermitian_eigenvalues(&(a - b));
    Ok(0.5 * (lo.abs() + hi.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransportSummary {
    pub t_max: f64,
    pub p_max: f64,
    pub v_n: f64,
    pub efficient: bool,
}

/// Earliest sample attaining the maximum of `series`.
pub fn earliest_argmax(series: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &p) in series.iter().enumerate() {
        match best {
            Some((_, b)) if p <= b => {}
            _ => best = Some((i, p)),
        }
    }
    best.map(|(i, _)| i)
}

/// Summary from an end-node series; `v_N = t_max / num_nodes`.
pub fn summarize_series(times: &[f64], series: &[f64], num_nodes: usize) -> TransportSummary {
    let i = earliest_argmax(series).expect("series must be nonempty");
    let t_max = times[i];
    let v_n = t_max / num_nodes as f64;
    TransportSummary {
        t_max,
        p_max: series[i],
        v_n,
        efficient: v_n < 1.0,
    }
}

/// Arrival summary for 1-based `target_node` over a nonempty trajectory.
pub fn transport_summary(traj: &Trajectory, target_node: usize) -> TransportSummary {
    let series: Vec<f64> = traj.states.iter().map(|s| occupation(s, target_node)).collect();
    summarize_series(&traj.times, &series, traj.num_nodes())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceDistanceSample {
    pub t: f64,
    /// Distance of `ρ_N / Tr ρ_N` to the target; `None` when the node is
    /// essentially empty.
    pub normalized: Option<f64>,
    /// Distance of the unnormalized block to the target.
    pub raw: f64,
}

pub fn trace_distance_series(
    traj: &Trajectory,
    target_node: usize,
    target: &Block,
) -> Result<Vec<TraceDistanceSample>, ObservableError> {
    traj.states
        .iter()
        .zip(&traj.times)
        .map(|(s, &t)| {
            let block = s.block(target_node);
            let raw = trace_distance(block, target)?;
            let tr = block.trace().re;
            let normalized = if tr > NORMALIZATION_FLOOR {
                Some(trace_distance(&(block * C64::new(1.0 / tr, 0.0)), target)?)
            } else {
                None
            };
            Ok(TraceDistanceSample { t, normalized, raw })
        })
        .collect()
}
