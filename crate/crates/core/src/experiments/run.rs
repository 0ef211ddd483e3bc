use super::artifacts::{occupation_csv, trace_distance_csv, write_atomic, write_json, RunSummary, StateDistances};
use super::config::{ExperimentConfig, Problem, SweepAxis};
use super::ExperimentError;
use crate::integrator::{Mode, Trajectory};
use crate::model::diagonal_block;
use crate::observables::{trace_distance_series, transport_summary, OccupationProfile, TraceDistanceSample};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Markov cutoff factors reported by [`compare_modes`] when the config does
/// not sweep them.
pub const DEFAULT_ETA_FACTORS: [f64; 3] = [0.05, 0.1, 0.2];

/// Full in-memory result of one simulation.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub profile: OccupationProfile,
    pub summary: RunSummary,
    pub to_ground: Vec<TraceDistanceSample>,
    pub to_excited: Vec<TraceDistanceSample>,
}

/// Where a run's files went, plus its summary.
#[derive(Debug, Clone)]
pub struct RunArtifact {
    pub dir: PathBuf,
    pub summary: RunSummary,
}

/// model → integrator → observables for a validated problem.
pub fn simulate(problem: &Problem) -> Result<RunOutcome, ExperimentError> {
    simulate_in(problem, problem.mode)
}

fn simulate_in(problem: &Problem, mode: Mode) -> Result<RunOutcome, ExperimentError> {
    let trajectory = problem.equation_in(mode).evolve(&problem.initial, &problem.grid)?;
    let profile = OccupationProfile::from_trajectory(&trajectory);
    let transport = transport_summary(&trajectory, problem.target_node);
    let to_ground = trace_distance_series(&trajectory, problem.target_node, &diagonal_block(1.0, 0.0))?;
    let to_excited = trace_distance_series(&trajectory, problem.target_node, &diagonal_block(0.0, 1.0))?;
    let at = trajectory
        .times
        .iter()
        .position(|&t| t == transport.t_max)
        .expect("t_max is a sampled time");
    let summary = RunSummary {
        num_nodes: problem.system.num_nodes(),
        target_node: problem.target_node,
        mode,
        convention: problem.convention,
        eta: problem.regularizer.eta(),
        samples: trajectory.len(),
        t_max: transport.t_max,
        p_max: transport.p_max,
        v_n: transport.v_n,
        efficient: transport.efficient,
        distances_at_t_max: StateDistances {
            to_ground: to_ground[at].normalized,
            to_excited: to_excited[at].normalized,
        },
        max_trace_defect: trajectory.max_trace_defect(),
        max_hermiticity_defect: trajectory.max_hermiticity_defect(),
        min_eigenvalue: trajectory.min_eigenvalue(),
    };
    Ok(RunOutcome {
        trajectory,
        profile,
        summary,
        to_ground,
        to_excited,
    })
}

fn write_run(outcome: &RunOutcome, dir: &Path, with_distances: bool) -> Result<(), ExperimentError> {
    write_atomic(&dir.join("occupation.csv"), occupation_csv(&outcome.profile).as_bytes())?;
    if with_distances {
        write_atomic(
            &dir.join("trace_distance.csv"),
            trace_distance_csv(&outcome.to_ground, &outcome.to_excited).as_bytes(),
        )?;
    }
    write_json(&dir.join("summary.json"), &outcome.summary)
}

/// Simulates a config without a sweep section and writes `occupation.csv`,
/// `summary.json` and (unless disabled) `trace_distance.csv` into `out_dir`.
pub fn run_single(config: &ExperimentConfig, out_dir: &Path) -> Result<RunArtifact, ExperimentError> {
    if config.sweep.is_some() {
        return Err(ExperimentError::invalid("sweep", "single runs take no sweep section; use `sweep`"));
    }
    let problem = config.build()?;
    let outcome = simulate(&problem)?;
    write_run(&outcome, out_dir, config.output.trace_distance)?;
    Ok(RunArtifact {
        dir: out_dir.to_path_buf(),
        summary: outcome.summary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub t_max: f64,
    pub p_max: f64,
    pub v_n: f64,
    pub efficient: bool,
}

impl SweepRow {
    fn new(value: f64, s: &RunSummary) -> Self {
        Self {
            value,
            t_max: s.t_max,
            p_max: s.p_max,
            v_n: s.v_n,
            efficient: s.efficient,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub value: f64,
    pub kind: String,
    pub message: String,
}

/// Contents of a sweep's `comparison.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub axis: String,
    pub rows: Vec<SweepRow>,
    pub failures: Vec<SweepFailure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode_comparison: Option<ModeComparison>,
}

fn sweep_values(config: &ExperimentConfig) -> Result<(SweepAxis, Vec<f64>), ExperimentError> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| ExperimentError::invalid("sweep", "missing sweep section"))?;
    if sweep.values.len() < 2 {
        return Err(ExperimentError::invalid("sweep.values", "a sweep needs at least two values"));
    }
    Ok((sweep.axis, sweep.values.clone()))
}

fn run_value(
    config: &ExperimentConfig,
    axis: SweepAxis,
    value: f64,
    dir: Option<&Path>,
) -> Result<RunSummary, ExperimentError> {
    let cfg = config.with_axis_value(axis, value)?;
    let problem = cfg.build()?;
    let outcome = simulate(&problem)?;
    if let Some(dir) = dir {
        write_run(&outcome, dir, cfg.output.trace_distance)?;
    }
    Ok(outcome.summary)
}

fn collect(values: &[f64], results: Vec<Result<RunSummary, ExperimentError>>) -> (Vec<SweepRow>, Vec<SweepFailure>) {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (&value, r) in values.iter().zip(results) {
        match r {
            Ok(s) => rows.push(SweepRow::new(value, &s)),
            Err(e) => failures.push(SweepFailure {
                value,
                kind: e.kind().to_string(),
                message: e.to_string(),
            }),
        }
    }
    (rows, failures)
}

/// Runs every sweep value without writing files. Per-value failures are
/// returned in the report rather than aborting the sweep.
pub fn evaluate_sweep(config: &ExperimentConfig) -> Result<SweepReport, ExperimentError> {
    let (axis, values) = sweep_values(config)?;
    if axis == SweepAxis::ModeCompare {
        let cmp = compare_modes_with(config, &values, None)?;
        return Ok(mode_sweep_report(cmp));
    }
    let results: Vec<_> = values.par_iter().map(|&v| run_value(config, axis, v, None)).collect();
    let (rows, failures) = collect(&values, results);
    Ok(SweepReport {
        axis: axis.name().to_string(),
        rows,
        failures,
        mode_comparison: None,
    })
}

/// Runs each value into `out_dir/<axis>_<index>/` and writes
/// `out_dir/comparison.json`.
pub fn run_sweep(config: &ExperimentConfig, out_dir: &Path) -> Result<SweepReport, ExperimentError> {
    let (axis, values) = sweep_values(config)?;
    let report = if axis == SweepAxis::ModeCompare {
        mode_sweep_report(compare_modes_with(config, &values, Some(out_dir))?)
    } else {
        let results: Vec<_> = values
            .par_iter()
            .enumerate()
            .map(|(i, &v)| {
                let dir = out_dir.join(format!("{}_{i:02}", axis.name()));
                run_value(config, axis, v, Some(&dir))
            })
            .collect();
        let (rows, failures) = collect(&values, results);
        SweepReport {
            axis: axis.name().to_string(),
            rows,
            failures,
            mode_comparison: None,
        }
    };
    write_json(&out_dir.join("comparison.json"), &report)?;
    Ok(report)
}

fn mode_sweep_report(cmp: ModeComparison) -> SweepReport {
    let rows = cmp
        .eta_sensitivity
        .iter()
        .map(|r| SweepRow {
            value: r.eta_factor,
            t_max: r.t_max,
            p_max: r.p_max,
            v_n: r.v_n,
            efficient: r.v_n < 1.0,
        })
        .collect();
    SweepReport {
        axis: SweepAxis::ModeCompare.name().to_string(),
        rows,
        failures: Vec::new(),
        mode_comparison: Some(cmp),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaSensitivityRow {
    pub eta_factor: f64,
    pub eta: f64,
    pub t_max: f64,
    pub p_max: f64,
    pub v_n: f64,
}

/// Contents of `comparison.json` written by `compare`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeComparison {
    pub redfield: RunSummary,
    pub markov: RunSummary,
    /// Both runs are frozen because every coupling vanishes; the ordering is
    /// then meaningless.
    pub static_dynamics: bool,
    /// `t_max(markov) < t_max(redfield)`; `None` for static dynamics.
    pub markov_earlier: Option<bool>,
    pub eta_sensitivity: Vec<EtaSensitivityRow>,
}

/// Runs identical physics in both modes, plus a Markov cutoff sensitivity
/// table over [`DEFAULT_ETA_FACTORS`]. Writes `redfield/`, `markov/` and
/// `comparison.json` under `out_dir` when given.
pub fn compare_modes(config: &ExperimentConfig, out_dir: Option<&Path>) -> Result<ModeComparison, ExperimentError> {
    let cmp = compare_modes_with(config, &DEFAULT_ETA_FACTORS, out_dir)?;
    if let Some(dir) = out_dir {
        write_json(&dir.join("comparison.json"), &cmp)?;
    }
    Ok(cmp)
}

fn compare_modes_with(
    config: &ExperimentConfig,
    eta_factors: &[f64],
    out_dir: Option<&Path>,
) -> Result<ModeComparison, ExperimentError> {
    let mut base = config.clone();
    base.sweep = None;
    let problem = base.build()?;
    let (redfield, markov) = rayon::join(
        || simulate_in(&problem, Mode::Redfield),
        || simulate_in(&problem, Mode::Markov),
    );
    let (redfield, markov) = (redfield?, markov?);
    if let Some(dir) = out_dir {
        write_run(&redfield, &dir.join("redfield"), base.output.trace_distance)?;
        write_run(&markov, &dir.join("markov"), base.output.trace_distance)?;
    }
    let eta_sensitivity = eta_factors
        .par_iter()
        .map(|&f| {
            let mut cfg = base.with_axis_value(SweepAxis::ModeCompare, f)?;
            cfg.mode = Mode::Markov;
            let p = cfg.build()?;
            let s = simulate_in(&p, Mode::Markov)?.summary;
            Ok(EtaSensitivityRow {
                eta_factor: f,
                eta: p.regularizer.eta(),
                t_max: s.t_max,
                p_max: s.p_max,
                v_n: s.v_n,
            })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let static_dynamics = problem.params.is_decoupled();
    let markov_earlier = (!static_dynamics).then_some(markov.summary.t_max < redfield.summary.t_max);
    Ok(ModeComparison {
        redfield: redfield.summary,
        markov: markov.summary,
        static_dynamics,
        markov_earlier,
        eta_sensitivity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{read_occupation_csv, SweepConfig};
    use crate::observables::summarize_series;

    fn small() -> ExperimentConfig {
        ExperimentConfig::from_toml_str(
            "[system]\nnum_nodes = 6\nlevels = [1.0, 10.0]\n[time]\nt_start = 0.0\nt_end = 3.0\ndt = 0.01\nsample_stride = 5\n",
        )
        .unwrap()
    }

    #[test]
    fn single_run_writes_three_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let art = run_single(&small(), dir.path()).unwrap();
        for f in ["occupation.csv", "summary.json", "trace_distance.csv"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let profile = read_occupation_csv(&dir.path().join("occupation.csv")).unwrap();
        assert_eq!(profile.times.len(), art.summary.samples);
        assert_eq!(profile.probabilities.len(), 6);
        // the comparison numbers can be recomputed from the CSV alone
        let offline = summarize_series(&profile.times, profile.node(6), 6);
        assert_eq!(offline.t_max, art.summary.t_max);
        assert_eq!(offline.p_max, art.summary.p_max);
    }

    #[test]
    fn trace_distance_file_is_optional() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small();
        cfg.output.trace_distance = false;
        run_single(&cfg, dir.path()).unwrap();
        assert!(!dir.path().join("trace_distance.csv").exists());
    }

    #[test]
    fn single_run_rejects_sweep_section() {
        let mut cfg = small();
        cfg.sweep = Some(SweepConfig {
            axis: SweepAxis::InitialAlpha,
            values: vec![0.5, 1.0],
        });
        let dir = tempfile::tempdir().unwrap();
        assert!(run_single(&cfg, dir.path()).is_err());
    }

    #[test]
    fn sweep_isolates_failing_values() {
        let mut cfg = small();
        // 10.05 puts ε₂ on the third reservoir level: that value must fail
        // alone
        cfg.sweep = Some(SweepConfig {
            axis: SweepAxis::SystemGap,
            values: vec![10.0, 10.05, 4.0],
        });
        let dir = tempfile::tempdir().unwrap();
        let report = run_sweep(&cfg, dir.path()).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].value, 10.05);
        assert_eq!(report.failures[0].kind, "coefficients");
        assert!(dir.path().join("comparison.json").exists());
        assert!(dir.path().join("system_gap_00/summary.json").exists());
        assert!(dir.path().join("system_gap_02/occupation.csv").exists());
    }

    #[test]
    fn sweep_needs_two_values() {
        let mut cfg = small();
        cfg.sweep = Some(SweepConfig {
            axis: SweepAxis::InitialAlpha,
            values: vec![0.5],
        });
        assert!(evaluate_sweep(&cfg).is_err());
        cfg.sweep = None;
        assert!(evaluate_sweep(&cfg).is_err());
    }

    #[test]
    fn zero_coupling_comparison_is_flagged_static() {
        let mut cfg = small();
        cfg.coupling.uniform = Some(0.0);
        cfg.markov.eta = Some(0.01);
        let cmp = compare_modes(&cfg, None).unwrap();
        assert!(cmp.static_dynamics);
        assert_eq!(cmp.markov_earlier, None);
        assert_eq!(cmp.redfield.p_max, 0.0);
        assert_eq!(cmp.eta_sensitivity.len(), 3);
    }

    #[test]
    fn mode_compare_sweep_reports_each_factor() {
        let mut cfg = small();
        cfg.sweep = Some(SweepConfig {
            axis: SweepAxis::ModeCompare,
            values: vec![0.05, 0.2],
        });
        let report = evaluate_sweep(&cfg).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert!(report.mode_comparison.is_some());
        let etas: Vec<f64> = report.mode_comparison.unwrap().eta_sensitivity.iter().map(|r| r.eta).collect();
        assert!((etas[0] - 0.0025).abs() < 1e-12 && (etas[1] - 0.01).abs() < 1e-12);
    }
}
