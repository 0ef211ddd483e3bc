//! Right-hand side of the lattice master equation and a fixed-step RK4
//! propagator.
//!
//! For every node `j` (with `j + 1` wrapping to the first node):
//!
//! ```text
//! dρ_j/dt = Σ_n −iΓ_n(t) [σ⁻σ⁺, ρ_j] + γ_n(t) (2 L ρ_{j+1} L† − {L†L, ρ_j})
//! ```
//!
//! where `L` is `σ⁻` or `σ⁺` depending on the [`DissipatorConvention`]. Since
//! every level channel acts with the same operators, only the level sums of
//! `Γ_n` and `γ_n` enter the derivative.

use crate::coefficients::{CoefficientError, CoefficientParams, Coefficients, Level, MarkovRegularizer};
use crate::model::{build_operators, ground_projector, validate_state, Block, Diagnostics, LatticeState, SystemSpec};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mid-run trace defect that aborts an integration.
pub const BLOW_UP_TRACE_DEFECT: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegratorError {
    #[error("state has {got} nodes, equation expects {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("non-finite coefficients at t = {0}")]
    NonFiniteCoefficients(f64),
    #[error("integration blew up at t = {time}: trace defect {defect:e}")]
    BlowUp { time: f64, defect: f64 },
    #[error("invalid time grid: {0}")]
    BadGrid(String),
    #[error(transparent)]
    Coefficient(#[from] CoefficientError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Time-dependent coefficients.
    #[default]
    Redfield,
    /// Constant, regularized coefficients.
    Markov,
}

/// Which operator moves population in from the neighbouring node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DissipatorConvention {
    /// `2σ⁻ρ_{j+1}σ⁺ − {σ⁺σ⁻, ρ_j}`: excited population of node `j+1`
    /// arrives at node `j` in the ground state.
    Lowering,
    /// `2σ⁺ρ_{j+1}σ⁻ − {σ⁻σ⁺, ρ_j}`: ground population of node `j+1`
    /// arrives at node `j` in the excited state.
    #[default]
    LindbladRaising,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "default_stride")]
    pub sample_stride: usize,
}

fn default_stride() -> usize {
    1
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t_start: 0.0,
            t_end: 60.0,
            dt: 0.01,
            sample_stride: 1,
        }
    }
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, dt: f64, sample_stride: usize) -> Result<Self, IntegratorError> {
        let grid = Self {
            t_start,
            t_end,
            dt,
            sample_stride,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), IntegratorError> {
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.dt.is_finite()) {
            return Err(IntegratorError::BadGrid("non-finite bounds or step".into()));
        }
        if self.t_end <= self.t_start {
            return Err(IntegratorError::BadGrid(format!("t_end {} <= t_start {}", self.t_end, self.t_start)));
        }
        if self.dt <= 0.0 {
            return Err(IntegratorError::BadGrid(format!("dt {} must be positive", self.dt)));
        }
        if self.sample_stride == 0 {
            return Err(IntegratorError::BadGrid("sample_stride must be positive".into()));
        }
        if (self.t_end - self.t_start) / self.dt > u32::MAX as f64 {
            return Err(IntegratorError::BadGrid("too many steps".into()));
        }
        Ok(())
    }

    /// Number of RK4 steps; the last step lands on `t_end` up to rounding.
    pub fn steps(&self) -> usize {
        ((self.t_end - self.t_start) / self.dt).round() as usize
    }

    pub fn time_at(&self, step: usize) -> f64 {
        self.t_start + step as f64 * self.dt
    }

    pub fn is_sampled(&self, step: usize) -> bool {
        step.is_multiple_of(self.sample_stride) || step == self.steps()
    }
}

/// `dρ_j/dt` for every node.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivative(pub Vec<Block>);

/// Time-sampled states with per-sample diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<LatticeState>,
    pub diagnostics: Vec<Diagnostics>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn num_nodes(&self) -> usize {
        self.states.first().map_or(0, |s| s.num_nodes())
    }

    pub fn final_state(&self) -> Option<&LatticeState> {
        self.states.last()
    }

    pub fn max_trace_defect(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.trace_defect).fold(0.0, f64::max)
    }

    pub fn max_hermiticity_defect(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.hermiticity_defect).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.min_eigenvalue).fold(f64::INFINITY, f64::min)
    }
}

/// The master equation for one parameter set on a lattice of fixed size.
#[derive(Debug, Clone)]
pub struct MasterEquation {
    num_nodes: usize,
    params: CoefficientParams,
    convention: DissipatorConvention,
    mode: Mode,
    markov: Coefficients,
    jump: Block,
    jump_adj: Block,
    jump_number: Block,
    shift_op: Block,
}

impl MasterEquation {
    pub fn new(
        system: &SystemSpec,
        params: CoefficientParams,
        convention: DissipatorConvention,
        mode: Mode,
        regularizer: MarkovRegularizer,
    ) -> Self {
        let (lowering, raising) = build_operators(system);
        let jump = match convention {
            DissipatorConvention::Lowering => lowering,
            DissipatorConvention::LindbladRaising => raising,
        };
        let markov = Level::ALL
            .iter()
            .map(|&l| params.markov(l, regularizer))
            .fold(Coefficients::default(), |a, b| a + b);
        Self {
            num_nodes: system.num_nodes(),
            params,
            convention,
            mode,
            markov,
            jump: jump.0,
            jump_adj: jump.adjoint().0,
            jump_number: (jump.adjoint() * jump).0,
            shift_op: ground_projector(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn params(&self) -> &CoefficientParams {
        &self.params
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn convention(&self) -> DissipatorConvention {
        self.convention
    }

    /// `(Σ_n Γ_n, Σ_n γ_n)` at time `t`.
    pub fn coefficients_at(&self, t: f64) -> Result<Coefficients, IntegratorError> {
        let c = match self.mode {
            Mode::Markov => self.markov,
            Mode::Redfield => {
                self.params.redfield(Level::Ground, t)? + self.params.redfield(Level::Excited, t)?
            }
        };
        if !(c.shift.is_finite() && c.rate.is_finite()) {
            return Err(IntegratorError::NonFiniteCoefficients(t));
        }
        Ok(c)
    }

    pub fn rhs(&self, state: &LatticeState, t: f64) -> Result<Derivative, IntegratorError> {
        self.check_dims(state.num_nodes())?;
        let mut out = vec![Block::zeros(); self.num_nodes];
        self.rhs_into(state.blocks(), t, &mut out)?;
        Ok(Derivative(out))
    }

    fn check_dims(&self, got: usize) -> Result<(), IntegratorError> {
        if got != self.num_nodes {
            return Err(IntegratorError::Dimension {
                expected: self.num_nodes,
                got,
            });
        }
        Ok(())
    }

    fn rhs_into(&self, blocks: &[Block], t: f64, out: &mut [Block]) -> Result<(), IntegratorError> {
        let c = self.coefficients_at(t)?;
        let minus_i_shift = C64::new(0.0, -c.shift);
        let rate = C64::new(c.rate, 0.0);
        let n = blocks.len();
        for (j, d) in out.iter_mut().enumerate() {
            let rho = &blocks[j];
            let next = &blocks[(j + 1) % n];
            let commutator = self.shift_op * rho - rho * self.shift_op;
            let gain = self.jump * next * self.jump_adj * C64::new(2.0, 0.0);
            let loss = self.jump_number * rho + rho * self.jump_number;
            *d = commutator * minus_i_shift + (gain - loss) * rate;
        }
        Ok(())
    }

    fn step_blocks(&self, y: &[Block], t: f64, dt: f64, scratch: &mut RkScratch) -> Result<Vec<Block>, IntegratorError> {
        let n = y.len();
        let RkScratch { k1, k2, k3, k4, tmp } = scratch;
        let half = C64::new(0.5 * dt, 0.0);
        let full = C64::new(dt, 0.0);

        self.rhs_into(y, t, k1)?;
        for i in 0..n {
            tmp[i] = y[i] + k1[i] * half;
        }
        self.rhs_into(tmp, t + 0.5 * dt, k2)?;
        for i in 0..n {
            tmp[i] = y[i] + k2[i] * half;
        }
        self.rhs_into(tmp, t + 0.5 * dt, k3)?;
        for i in 0..n {
            tmp[i] = y[i] + k3[i] * full;
        }
        self.rhs_into(tmp, t + dt, k4)?;

        let sixth = C64::new(dt / 6.0, 0.0);
        let two = C64::new(2.0, 0.0);
        Ok((0..n)
            .map(|i| {
                let next = y[i] + (k1[i] + k2[i] * two + k3[i] * two + k4[i]) * sixth;
                hermitize(&next)
            })
            .collect())
    }

    /// One classical RK4 step from `state.time()`; the result is
    /// re-Hermitized block by block.
    pub fn step_rk4(&self, state: &LatticeState, dt: f64) -> Result<LatticeState, IntegratorError> {
        self.check_dims(state.num_nodes())?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(IntegratorError::BadGrid(format!("dt {dt} must be positive")));
        }
        let mut scratch = RkScratch::new(self.num_nodes);
        let blocks = self.step_blocks(state.blocks(), state.time(), dt, &mut scratch)?;
        Ok(LatticeState::from_parts(blocks, state.time() + dt))
    }

    /// Integrates over `grid`, keeping every `sample_stride`-th state plus
    /// the final one. Aborts if the trace defect exceeds
    /// [`BLOW_UP_TRACE_DEFECT`].
    pub fn evolve(&self, initial: &LatticeState, grid: &TimeGrid) -> Result<Trajectory, IntegratorError> {
        self.check_dims(initial.num_nodes())?;
        grid.validate()?;
        let steps = grid.steps();
        let mut scratch = RkScratch::new(self.num_nodes);
        let mut current = LatticeState::from_parts(initial.blocks().to_vec(), grid.t_start);
        let capacity = steps / grid.sample_stride + 2;
        let mut traj = Trajectory {
            times: Vec::with_capacity(capacity),
            states: Vec::with_capacity(capacity),
            diagnostics: Vec::with_capacity(capacity),
        };
        traj.times.push(grid.t_start);
        traj.diagnostics.push(validate_state(&current));
        traj.states.push(current.clone());

        for step in 1..=steps {
            let t = grid.time_at(step - 1);
            let blocks = self.step_blocks(current.blocks(), t, grid.dt, &mut scratch)?;
            current = LatticeState::from_parts(blocks, grid.time_at(step));
            let defect = (current.total_trace() - 1.0).abs();
            if defect.is_nan() || defect > BLOW_UP_TRACE_DEFECT {
                return Err(IntegratorError::BlowUp {
                    time: current.time(),
                    defect,
                });
            }
            if grid.is_sampled(step) {
                traj.times.push(current.time());
                traj.diagnostics.push(validate_state(&current));
                traj.states.push(current.clone());
            }
        }
        Ok(traj)
    }
}

struct RkScratch {
    k1: Vec<Block>,
    k2: Vec<Block>,
    k3: Vec<Block>,
    k4: Vec<Block>,
    tmp: Vec<Block>,
}

impl RkScratch {
    fn new(n: usize) -> Self {
        let z = vec![Block::zeros(); n];
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }
}

fn hermitize(m: &Block) -> Block {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}
