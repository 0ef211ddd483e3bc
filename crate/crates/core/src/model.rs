//! Static problem data: the lattice of two-level systems, the discrete
//! reservoir, their couplings, and the per-node density-matrix blocks.
//!
//! Internal states are ordered `(ground, excited)` everywhere in this crate.

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;
use thiserror::Error;

/// A 2×2 complex matrix acting on the internal space of one lattice node.
pub type Block = Matrix2<C64>;

/// Tolerance on `|Σ_j Tr ρ_j − 1|` enforced when a state is constructed.
pub const TRACE_TOLERANCE: f64 = 1e-10;
/// Tolerance on the per-block Hermiticity defect enforced at construction.
pub const HERMITICITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("lattice needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("system levels must satisfy excited > ground, got ({0}, {1})")]
    LevelOrder(f64, f64),
    #[error("environment needs at least one level")]
    EmptyEnvironment,
    #[error("environment levels must be strictly ascending (level {index} = {value})")]
    EnvNotAscending { index: usize, value: f64 },
    #[error("environment level {env} coincides with system level {system}")]
    Degenerate { system: f64, env: f64 },
    #[error("coupling matrix has {got} rows, environment has {expected} levels")]
    CouplingShape { got: usize, expected: usize },
    #[error("coupling g[{k}][{n}] must be finite")]
    BadCoupling { k: usize, n: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("initial weights must be non-negative and sum to 1 (alpha = {alpha}, beta = {beta})")]
    Weights { alpha: f64, beta: f64 },
    #[error("start node {node} outside 1..={num_nodes}")]
    NodeOutOfRange { node: usize, num_nodes: usize },
    #[error("block {index} is not Hermitian (defect {defect:e})")]
    NotHermitian { index: usize, defect: f64 },
    #[error("total trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },
}

/// Energy-level structure of the lattice (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemSpec {
    num_nodes: usize,
    levels: [f64; 2],
}

impl SystemSpec {
    pub fn new(num_nodes: usize, ground: f64, excited: f64) -> Result<Self, ModelError> {
        if num_nodes < 2 {
            return Err(ModelError::TooFewNodes(num_nodes));
        }
        if !ground.is_finite() || !excited.is_finite() {
            return Err(ModelError::NonFinite("system levels"));
        }
        if excited <= ground {
            return Err(ModelError::LevelOrder(ground, excited));
        }
        Ok(Self {
            num_nodes,
            levels: [ground, excited],
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// `(ε₁, ε₂)`.
    pub fn levels(&self) -> [f64; 2] {
        self.levels
    }
}

/// The discrete reservoir: `M` ascending energy levels.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    levels: Vec<f64>,
}

impl EnvSpec {
    pub fn new(levels: Vec<f64>) -> Result<Self, ModelError> {
        if levels.is_empty() {
            return Err(ModelError::EmptyEnvironment);
        }
        if levels.iter().any(|e| !e.is_finite()) {
            return Err(ModelError::NonFinite("environment levels"));
        }
        for (index, w) in levels.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(ModelError::EnvNotAscending {
                    index: index + 1,
                    value: w[1],
                });
            }
        }
        Ok(Self { levels })
    }

    /// `count` levels starting at `ground`, separated by `spacing`.
    pub fn evenly_spaced(ground: f64, spacing: f64, count: usize) -> Result<Self, ModelError> {
        Self::new((0..count).map(|k| ground + spacing * k as f64).collect())
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Rejects any reservoir level that coincides with a system level.
    pub fn check_against(&self, system: &SystemSpec) -> Result<(), ModelError> {
        for &eps in &system.levels {
            for &e in &self.levels {
                if (eps - e).abs() <= 1e-12 * eps.abs().max(1.0) {
                    return Err(ModelError::Degenerate { system: eps, env: e });
                }
            }
        }
        Ok(())
    }
}

/// Coupling constants `g[k][n]` between reservoir level `k` and system level `n`.
/// Node-independent. A zero entry switches that channel off.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSpec {
    g: Vec<[C64; 2]>,
}

impl CouplingSpec {
    pub fn new(g: Vec<[C64; 2]>) -> Result<Self, ModelError> {
        for (k, row) in g.iter().enumerate() {
            for (n, z) in row.iter().enumerate() {
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(ModelError::BadCoupling { k, n });
                }
            }
        }
        Ok(Self { g })
    }

    /// Every entry equal to `value`.
    pub fn uniform(num_env_levels: usize, value: f64) -> Result<Self, ModelError> {
        Self::new(vec![[C64::new(value, 0.0); 2]; num_env_levels])
    }

    pub fn rows(&self) -> &[[C64; 2]] {
        &self.g
    }

    pub fn check_against(&self, env: &EnvSpec) -> Result<(), ModelError> {
        if self.g.len() != env.len() {
            return Err(ModelError::CouplingShape {
                got: self.g.len(),
                expected: env.len(),
            });
        }
        Ok(())
    }

    /// `max_{n,k} |g_nk|² / |ε_n − E_k|`. Values near or above 1 put the
    /// second-order master equation outside its regime of validity.
    pub fn weak_coupling_ratio(&self, system: &SystemSpec, env: &EnvSpec) -> f64 {
        let mut worst = 0.0_f64;
        for (row, &e) in self.g.iter().zip(env.levels()) {
            for (z, &eps) in row.iter().zip(system.levels.iter()) {
                worst = worst.max(z.norm_sqr() / (eps - e).abs());
            }
        }
        worst
    }

    /// Logs a warning when the weak-coupling ratio is not small.
    pub fn warn_if_strong(&self, system: &SystemSpec, env: &EnvSpec) {
        let ratio = self.weak_coupling_ratio(system, env);
        if ratio > 0.1 {
            log::warn!("weak-coupling ratio max |g|^2/|eps - E| = {ratio:.3} is not << 1");
        }
    }
}

/// A 2×2 operator on the internal space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InternalOperator(pub Block);

impl InternalOperator {
    pub fn matrix(&self) -> &Block {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self(self.0 * other.0 - other.0 * self.0)
    }
}

impl std::ops::Mul for InternalOperator {
    type Output = InternalOperator;

    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

/// The ladder pair `(σ⁻, σ⁺)`. A single lowering operator `|g⟩⟨e|` serves both
/// level channels; channels differ only through their coefficients.
pub fn build_operators(_spec: &SystemSpec) -> (InternalOperator, InternalOperator) {
    let lowering = InternalOperator(Block::new(
        C64::new(0.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
    ));
    (lowering, lowering.adjoint())
}

/// Projector onto the ground state, `σ⁻σ⁺`.
pub fn ground_projector() -> Block {
    Block::from_diagonal(&nalgebra::Vector2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0)))
}

/// Projector onto the excited state, `σ⁺σ⁻`.
pub fn excited_projector() -> Block {
    Block::from_diagonal(&nalgebra::Vector2::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0)))
}

/// Real diagonal block `diag(ground, excited)`.
pub fn diagonal_block(ground: f64, excited: f64) -> Block {
    Block::from_diagonal(&nalgebra::Vector2::new(
        C64::new(ground, 0.0),
        C64::new(excited, 0.0),
    ))
}

/// `max_{ab} |m_ab − conj(m_ba)|`.
pub fn hermiticity_defect(m: &Block) -> f64 {
    let mut worst = 0.0_f64;
    for a in 0..2 {
        for b in 0..2 {
            worst = worst.max((m[(a, b)] - m[(b, a)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of the Hermitian part of a 2×2 block, ascending.
pub fn hermitian_eigenvalues(m: &Block) -> [f64; 2] {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let off = 0.5 * (m[(0, 1)] + m[(1, 0)].conj());
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + off.norm_sqr()).sqrt();
    [mean - radius, mean + radius]
}

/// Per-node internal density matrices at a single time.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    blocks: Vec<Block>,
    time: f64,
}

impl LatticeState {
    /// Validates Hermiticity and unit total trace.
    pub fn new(blocks: Vec<Block>, time: f64) -> Result<Self, ModelError> {
        if blocks.len() < 2 {
            return Err(ModelError::TooFewNodes(blocks.len()));
        }
        for (index, b) in blocks.iter().enumerate() {
            if b.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(ModelError::NonFinite("state block"));
            }
            let defect = hermiticity_defect(b);
            if defect > HERMITICITY_TOLERANCE {
                return Err(ModelError::NotHermitian { index, defect });
            }
        }
        let state = Self { blocks, time };
        let trace = state.total_trace();
        if (trace - 1.0).abs() > TRACE_TOLERANCE {
            return Err(ModelError::TraceNotOne { trace });
        }
        Ok(state)
    }

    /// No validation; for states produced by the integrator, which are
    /// monitored rather than enforced.
    pub(crate) fn from_parts(blocks: Vec<Block>, time: f64) -> Self {
        Self { blocks, time }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Block of node `node`, 1-based.
    pub fn block(&self, node: usize) -> &Block {
        &self.blocks[node - 1]
    }

    pub fn num_nodes(&self) -> usize {
        self.blocks.len()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn total_trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.trace().re).sum()
    }
}

/// `ρ_S(0) = α ρ_g + β ρ_e` localized at `start_node` (1-based).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialStateSpec {
    pub alpha: f64,
    pub beta: f64,
    pub start_node: usize,
}

impl InitialStateSpec {
    pub fn ground_at(start_node: usize) -> Self {
        Self {
            alpha: 1.0,
            beta: 0.0,
            start_node,
        }
    }
}

pub fn make_initial_state(init: &InitialStateSpec, num_nodes: usize) -> Result<LatticeState, ModelError> {
    let InitialStateSpec {
        alpha,
        beta,
        start_node,
    } = *init;
    if !alpha.is_finite() || !beta.is_finite() || alpha < 0.0 || beta < 0.0 || (alpha + beta - 1.0).abs() > 1e-12 {
        return Err(ModelError::Weights { alpha, beta });
    }
    if start_node == 0 || start_node > num_nodes {
        return Err(ModelError::NodeOutOfRange {
            node: start_node,
            num_nodes,
        });
    }
    let mut blocks = vec![Block::zeros(); num_nodes];
    blocks[start_node - 1] = diagonal_block(alpha, beta);
    LatticeState::new(blocks, 0.0)
}

/// Health of a state; reporting only.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Diagnostics {
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    /// Smallest eigenvalue over all blocks. Negative means a positivity
    /// violation.
    pub min_eigenvalue: f64,
}

pub fn validate_state(state: &LatticeState) -> Diagnostics {
    let hermiticity_defect = state
        .blocks
        .iter()
        .map(hermiticity_defect)
        .fold(0.0, f64::max);
    let min_eigenvalue = state
        .blocks
        .iter()
        .map(|b| hermitian_eigenvalues(b)[0])
        .fold(f64::INFINITY, f64::min);
    Diagnostics {
        hermiticity_defect,
        trace_defect: (state.total_trace() - 1.0).abs(),
        min_eigenvalue,
    }
}
