use super::config::ExperimentConfig;
use super::exact::{exact_oracle_run, ExactOracleReport, MAX_EXACT_ENV_LEVELS, MAX_EXACT_NODES};
use super::ExperimentError;
use crate::coefficients::{CoefficientParams, Level};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Closed form vs quadrature agreement required by the suite.
pub const COEFFICIENT_SUITE_TOLERANCE: f64 = 1e-8;
pub const COEFFICIENT_SUITE_STEP: f64 = 0.1;
pub const COEFFICIENT_SUITE_POINTS: usize = 600;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSuiteReport {
    pub points: usize,
    pub levels: usize,
    pub max_shift_difference: f64,
    pub max_rate_difference: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares the closed-form coefficients with the quadrature oracle at
/// `t = 0.1, 0.2, …, 60` for both levels.
pub fn coefficient_oracle_suite(params: &CoefficientParams) -> Result<CoefficientSuiteReport, ExperimentError> {
    let diffs = (1..=COEFFICIENT_SUITE_POINTS)
        .into_par_iter()
        .flat_map_iter(|i| Level::ALL.map(move |l| (l, i as f64 * COEFFICIENT_SUITE_STEP)))
        .map(|(level, t)| {
            let closed = params.redfield(level, t)?;
            let oracle = params.quadrature_oracle(level, t)?;
            Ok(((closed.shift - oracle.shift).abs(), (closed.rate - oracle.rate).abs()))
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let max_shift_difference = diffs.iter().map(|d| d.0).fold(0.0, f64::max);
    let max_rate_difference = diffs.iter().map(|d| d.1).fold(0.0, f64::max);
    Ok(CoefficientSuiteReport {
        points: COEFFICIENT_SUITE_POINTS,
        levels: Level::ALL.len(),
        max_shift_difference,
        max_rate_difference,
        tolerance: COEFFICIENT_SUITE_TOLERANCE,
        passed: max_shift_difference.max(max_rate_difference) <= COEFFICIENT_SUITE_TOLERANCE,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub coefficients: CoefficientSuiteReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactOracleReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_skipped: Option<String>,
    /// Coefficient suite within tolerance and, when the exact oracle ran,
    /// excitation number conserved. The Redfield deviation is not gated.
    pub passed: bool,
}

/// Validates the config, then runs the coefficient suite and, for small
/// enough lattices, the exact oracle.
pub fn validate(config: &ExperimentConfig) -> Result<ValidationReport, ExperimentError> {
    config.validate_sweep()?;
    let problem = config.build()?;
    let coefficients = coefficient_oracle_suite(&problem.params)?;
    let n = problem.system.num_nodes();
    let m = problem.env.len();
    let (exact, exact_skipped) = if n <= MAX_EXACT_NODES && m <= MAX_EXACT_ENV_LEVELS {
        (Some(exact_oracle_run(&problem)?), None)
    } else {
        let reason = format!(
            "lattice too large for the exact oracle (N = {n}, M = {m}; needs N ≤ {MAX_EXACT_NODES}, M ≤ {MAX_EXACT_ENV_LEVELS})"
        );
        (None, Some(reason))
    };
    let passed = coefficients.passed && exact.as_ref().is_none_or(|e| e.excitation_conserved);
    Ok(ValidationReport {
        coefficients,
        exact,
        exact_skipped,
        passed,
    })
}
