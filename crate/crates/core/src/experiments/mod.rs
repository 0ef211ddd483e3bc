//! Config-driven runs, sweeps, mode comparisons and validation harnesses,
//! with CSV/JSON artifacts.

mod artifacts;
mod config;
mod exact;
mod run;
mod validate;

pub use artifacts::{format_float, occupation_csv, read_occupation_csv, RunSummary, StateDistances};
pub use config::{
    CouplingConfig, EnvironmentConfig, ExperimentConfig, InitialConfig, MarkovConfig, OutputConfig, Problem,
    SweepAxis, SweepConfig, SystemConfig, DEFAULT_ETA_FACTOR,
};
pub use exact::{exact_oracle_run, ExactOracleReport, MAX_EXACT_DIMENSION};
pub use run::{
    compare_modes, evaluate_sweep, run_single, run_sweep, simulate, EtaSensitivityRow, ModeComparison, RunArtifact,
    RunOutcome, SweepFailure, SweepReport, SweepRow, DEFAULT_ETA_FACTORS,
};
pub use validate::{coefficient_oracle_suite, validate, CoefficientSuiteReport, ValidationReport};

use crate::coefficients::CoefficientError;
use crate::integrator::IntegratorError;
use crate::model::ModelError;
use crate::observables::ObservableError;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{}config parse error: {message}", path.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default())]
    Parse { path: Option<PathBuf>, message: String },
    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed artifact {path}: {message}")]
    Artifact { path: PathBuf, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Coefficient(#[from] CoefficientError),
    #[error(transparent)]
    Integrator(#[from] IntegratorError),
    #[error(transparent)]
    Observable(#[from] ObservableError),
}

impl ExperimentError {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Parse { .. } => "config_parse",
            Self::Invalid { .. } => "config_invalid",
            Self::Io { .. } => "io",
            Self::Artifact { .. } => "artifact",
            Self::Json(_) => "json",
            Self::Model(_) => "model",
            Self::Coefficient(_) => "coefficients",
            Self::Integrator(IntegratorError::BlowUp { .. }) => "integration_blow_up",
            Self::Integrator(_) => "integrator",
            Self::Observable(_) => "observables",
        }
    }
}
