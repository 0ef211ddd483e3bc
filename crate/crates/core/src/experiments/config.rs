//! Declarative run description, read from TOML. Every section is optional and
//! falls back to the default lattice (100 nodes, ε = (1, 10), five reservoir
//! levels from 0.05 spaced by 5, uniform g = 0.05, ground state at node 1,
//! t ∈ [0, 60] with dt = 0.01). Unknown keys are rejected.

use super::ExperimentError;
use crate::coefficients::{CoefficientParams, MarkovRegularizer};
use crate::integrator::{DissipatorConvention, MasterEquation, Mode, TimeGrid};
use crate::model::{make_initial_state, CouplingSpec, EnvSpec, InitialStateSpec, LatticeState, SystemSpec};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub num_nodes: usize,
    /// `[ε₁, ε₂]`.
    pub levels: [f64; 2],
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            num_nodes: 100,
            levels: [1.0, 10.0],
        }
    }
}

/// Either an explicit `levels` list or the evenly spaced
/// `ground`/`spacing`/`count` form, not both.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

pub const DEFAULT_ENV_GROUND: f64 = 0.05;
pub const DEFAULT_ENV_SPACING: f64 = 5.0;
pub const DEFAULT_ENV_COUNT: usize = 5;
pub const DEFAULT_COUPLING: f64 = 0.05;
pub const DEFAULT_ETA_FACTOR: f64 = 0.1;

impl EnvironmentConfig {
    fn is_generated(&self) -> bool {
        self.levels.is_none()
    }

    pub fn build(&self) -> Result<EnvSpec, ExperimentError> {
        match &self.levels {
            Some(levels) => {
                if self.ground.is_some() || self.spacing.is_some() || self.count.is_some() {
                    return Err(ExperimentError::invalid(
                        "environment",
                        "give either `levels` or `ground`/`spacing`/`count`, not both",
                    ));
                }
                Ok(EnvSpec::new(levels.clone())?)
            }
            None => Ok(EnvSpec::evenly_spaced(
                self.ground.unwrap_or(DEFAULT_ENV_GROUND),
                self.spacing.unwrap_or(DEFAULT_ENV_SPACING),
                self.count.unwrap_or(DEFAULT_ENV_COUNT),
            )?),
        }
    }
}

/// Either `uniform = g` or `matrix = [[g_k1, g_k2], ...]` (one row per
/// reservoir level). Defaults to uniform 0.05.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<[f64; 2]>>,
}

impl CouplingConfig {
    pub fn build(&self, env: &EnvSpec) -> Result<CouplingSpec, ExperimentError> {
        let spec = match (self.uniform, &self.matrix) {
            (Some(_), Some(_)) => {
                return Err(ExperimentError::invalid("coupling", "give either `uniform` or `matrix`, not both"))
            }
            (_, Some(rows)) => CouplingSpec::new(rows.iter().map(|r| r.map(|g| C64::new(g, 0.0))).collect())?,
            (u, None) => CouplingSpec::uniform(env.len(), u.unwrap_or(DEFAULT_COUPLING))?,
        };
        spec.check_against(env)?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub alpha: f64,
    /// Defaults to `1 − alpha`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default = "one")]
    pub start_node: usize,
}

fn one() -> usize {
    1
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: None,
            start_node: 1,
        }
    }
}

impl InitialConfig {
    pub fn spec(&self) -> InitialStateSpec {
        InitialStateSpec {
            alpha: self.alpha,
            beta: self.beta.unwrap_or(1.0 - self.alpha),
            start_node: self.start_node,
        }
    }
}

/// `eta` sets the cutoff directly; otherwise `eta = eta_factor · min|ω|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default = "default_eta_factor")]
    pub eta_factor: f64,
}

fn default_eta_factor() -> f64 {
    DEFAULT_ETA_FACTOR
}

impl Default for MarkovConfig {
    fn default() -> Self {
        Self {
            eta: None,
            eta_factor: DEFAULT_ETA_FACTOR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Value is the excited level ε₂; ε₁ is held fixed.
    SystemGap,
    /// Value is the reservoir level count M (evenly spaced form only).
    EnvLevelCount,
    /// Value is the reservoir level spacing (evenly spaced form only).
    EnvSpacing,
    /// Value is α, with β = 1 − α.
    InitialAlpha,
    /// Value is the Markov cutoff factor; each is compared with Redfield.
    ModeCompare,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::SystemGap => "system_gap",
            SweepAxis::EnvLevelCount => "env_level_count",
            SweepAxis::EnvSpacing => "env_spacing",
            SweepAxis::InitialAlpha => "initial_alpha",
            SweepAxis::ModeCompare => "mode_compare",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Write `trace_distance.csv` alongside the occupation series.
    #[serde(default = "yes")]
    pub trace_distance: bool,
    /// 1-based node whose arrival is summarized; defaults to the last node.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_node: Option<usize>,
}

fn yes() -> bool {
    true
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            trace_distance: true,
            target_node: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default)]
    pub environment: EnvironmentConfig,
    #[serde(default)]
    pub coupling: CouplingConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub time: TimeGrid,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub convention: DissipatorConvention,
    #[serde(default)]
    pub markov: MarkovConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    /// Only used by randomized checks; the simulation itself is deterministic.
    #[serde(default)]
    pub seed: u64,
}

/// Everything a run needs, validated.
#[derive(Debug, Clone)]
pub struct Problem {
    pub system: SystemSpec,
    pub env: EnvSpec,
    pub coupling: CouplingSpec,
    pub params: CoefficientParams,
    pub regularizer: MarkovRegularizer,
    pub initial: LatticeState,
    pub grid: TimeGrid,
    pub mode: Mode,
    pub convention: DissipatorConvention,
    pub target_node: usize,
}

impl Problem {
    pub fn equation(&self) -> MasterEquation {
        self.equation_in(self.mode)
    }

    pub fn equation_in(&self, mode: Mode) -> MasterEquation {
        MasterEquation::new(&self.system, self.params.clone(), self.convention, mode, self.regularizer)
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::Parse {
            path: None,
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| ExperimentError::Parse {
            path: Some(path.to_path_buf()),
            message: e.to_string(),
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config is always representable as TOML")
    }

    pub fn build(&self) -> Result<Problem, ExperimentError> {
        let system = SystemSpec::new(self.system.num_nodes, self.system.levels[0], self.system.levels[1])?;
        let env = self.environment.build()?;
        let coupling = self.coupling.build(&env)?;
        coupling.warn_if_strong(&system, &env);
        let params = CoefficientParams::new(&system, &env, &coupling)?;
        let regularizer = match self.markov.eta {
            Some(eta) => MarkovRegularizer::new(eta)?,
            None => MarkovRegularizer::relative(&params, self.markov.eta_factor)?,
        };
        self.time.validate()?;
        let initial = make_initial_state(&self.initial.spec(), system.num_nodes())?;
        let target_node = self.output.target_node.unwrap_or(system.num_nodes());
        if target_node == 0 || target_node > system.num_nodes() {
            return Err(ExperimentError::invalid(
                "output.target_node",
                format!("{target_node} outside 1..={}", system.num_nodes()),
            ));
        }
        Ok(Problem {
            system,
            env,
            coupling,
            params,
            regularizer,
            initial,
            grid: self.time,
            mode: self.mode,
            convention: self.convention,
            target_node,
        })
    }

    /// Checks the sweep section, if any: at least two values, each valid for
    /// its axis.
    pub fn validate_sweep(&self) -> Result<(), ExperimentError> {
        let Some(sweep) = &self.sweep else {
            return Ok(());
        };
        if sweep.values.len() < 2 {
            return Err(ExperimentError::invalid("sweep.values", "a sweep needs at least two values"));
        }
        for &v in &sweep.values {
            self.with_axis_value(sweep.axis, v)?;
        }
        Ok(())
    }

    /// A copy of this config with `value` applied on `axis` and the sweep
    /// section removed.
    pub fn with_axis_value(&self, axis: SweepAxis, value: f64) -> Result<Self, ExperimentError> {
        let field = format!("sweep.values ({})", axis.name());
        if !value.is_finite() {
            return Err(ExperimentError::invalid(field, "non-finite value"));
        }
        let mut cfg = self.clone();
        cfg.sweep = None;
        match axis {
            SweepAxis::SystemGap => {
                if value <= cfg.system.levels[0] {
                    return Err(ExperimentError::invalid(field, format!("excited level {value} must exceed ground level")));
                }
                cfg.system.levels[1] = value;
            }
            SweepAxis::EnvLevelCount => {
                if !cfg.environment.is_generated() {
                    return Err(ExperimentError::invalid(field, "needs the ground/spacing/count environment form"));
                }
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(ExperimentError::invalid(field, format!("level count {value} must be a positive integer")));
                }
                if cfg.coupling.matrix.is_some() {
                    return Err(ExperimentError::invalid(field, "needs uniform coupling"));
                }
                cfg.environment.count = Some(value as usize);
            }
            SweepAxis::EnvSpacing => {
                if !cfg.environment.is_generated() {
                    return Err(ExperimentError::invalid(field, "needs the ground/spacing/count environment form"));
                }
                if value <= 0.0 {
                    return Err(ExperimentError::invalid(field, format!("spacing {value} must be positive")));
                }
                cfg.environment.spacing = Some(value);
            }
            SweepAxis::InitialAlpha => {
                if !(0.0..=1.0).contains(&value) {
                    return Err(ExperimentError::invalid(field, format!("alpha {value} outside [0, 1]")));
                }
                cfg.initial.alpha = value;
                cfg.initial.beta = None;
            }
            SweepAxis::ModeCompare => {
                if value <= 0.0 {
                    return Err(ExperimentError::invalid(field, format!("eta factor {value} must be positive")));
                }
                cfg.markov.eta = None;
                cfg.markov.eta_factor = value;
            }
        }
        Ok(cfg)
    }
}
