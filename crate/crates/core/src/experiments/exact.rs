//! Brute-force check of the lattice equation on tiny instances: the joint
//! lattice ⊗ reservoir density matrix is propagated under the interaction
//! picture coupling, the reservoir is traced out and the result is compared
//! with the master equation solution.
//!
//! Each reservoir mode is truncated at single occupation. The basis index of
//! `(node j, internal s, occupation bits b)` is `(2j + s)·2^M + b`.

use super::config::Problem;
use super::ExperimentError;
use crate::coefficients::Level;
use crate::integrator::Mode;
use crate::model::LatticeState;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub const MAX_EXACT_DIMENSION: usize = 512;
pub const MAX_EXACT_NODES: usize = 4;
pub const MAX_EXACT_ENV_LEVELS: usize = 2;
/// Allowed drift of the total excitation number expectation.
pub const EXCITATION_TOLERANCE: f64 = 1e-8;
/// The weak-coupling envelope is this factor times the largest coefficient
/// magnitude times elapsed time.
pub const ENVELOPE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactOracleReport {
    pub num_nodes: usize,
    pub env_levels: usize,
    pub dimension: usize,
    pub truncation: String,
    pub times: Vec<f64>,
    /// Frobenius norm of (reduced exact state − master equation state).
    pub deviation: Vec<f64>,
    pub max_deviation: f64,
    pub max_coefficient: f64,
    pub envelope: Vec<f64>,
    pub within_envelope: bool,
    pub excitation_initial: f64,
    pub max_excitation_drift: f64,
    pub excitation_conserved: bool,
    pub max_trace_drift: f64,
}

struct Transition {
    to: usize,
    from: usize,
    mode: usize,
}

struct JointSystem {
    dim: usize,
    transitions: Vec<Transition>,
    // [k] → (ω, g) for each level
    channels: Vec<[(f64, C64); 2]>,
    excitations: Vec<f64>,
    num_nodes: usize,
    env_levels: usize,
}

impl JointSystem {
    fn new(problem: &Problem) -> Self {
        let n = problem.system.num_nodes();
        let m = problem.env.len();
        let occupations = 1usize << m;
        let dim = 2 * n * occupations;
        let index = |j: usize, s: usize, b: usize| (2 * j + s) * occupations + b;
        let mut transitions = Vec::new();
        for j in 0..n {
            for b in 0..occupations {
                for k in 0..m {
                    if b & (1 << k) == 0 {
                        // σ⁻ at node j, hop to j+1, create a quantum in mode k
                        transitions.push(Transition {
                            to: index((j + 1) % n, 0, b | (1 << k)),
                            from: index(j, 1, b),
                            mode: k,
                        });
                    }
                }
            }
        }
        let eps = problem.system.levels();
        let channels = problem
            .env
            .levels()
            .iter()
            .zip(problem.coupling.rows())
            .map(|(e, row)| [(eps[0] - e, row[0]), (eps[1] - e, row[1])])
            .collect();
        let excitations = (0..dim)
            .map(|i| {
                let b = i % occupations;
                let s = (i / occupations) % 2;
                (s + b.count_ones() as usize) as f64
            })
            .collect();
        Self {
            dim,
            transitions,
            channels,
            excitations,
            num_nodes: n,
            env_levels: m,
        }
    }

    fn amplitudes(&self, t: f64) -> Vec<C64> {
        self.channels
            .iter()
            .map(|ch| {
                ch.iter()
                    .map(|&(w, g)| g * C64::from_polar(1.0, -w * t))
                    .sum()
            })
            .collect()
    }

    /// `−i[H(t), ρ]`.
    fn rhs(&self, rho: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
        let f = self.amplitudes(t);
        let mut h_rho = DMatrix::zeros(self.dim, self.dim);
        let mut rho_h = DMatrix::zeros(self.dim, self.dim);
        for tr in &self.transitions {
            let h = f[tr.mode];
            if h == C64::new(0.0, 0.0) {
                continue;
            }
            // H[to, from] = h, H[from, to] = h*
            for c in 0..self.dim {
                h_rho[(tr.to, c)] += h * rho[(tr.from, c)];
                h_rho[(tr.from, c)] += h.conj() * rho[(tr.to, c)];
                rho_h[(c, tr.from)] += rho[(c, tr.to)] * h;
                rho_h[(c, tr.to)] += rho[(c, tr.from)] * h.conj();
            }
        }
        (h_rho - rho_h) * C64::new(0.0, -1.0)
    }

    fn step(&self, rho: &DMatrix<C64>, t: f64, dt: f64) -> DMatrix<C64> {
        let half = C64::new(0.5 * dt, 0.0);
        let k1 = self.rhs(rho, t);
        let k2 = self.rhs(&(rho + &k1 * half), t + 0.5 * dt);
        let k3 = self.rhs(&(rho + &k2 * half), t + 0.5 * dt);
        let k4 = self.rhs(&(rho + &k3 * C64::new(dt, 0.0)), t + dt);
        rho + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0)
    }

    fn embed(&self, state: &LatticeState) -> DMatrix<C64> {
        let occupations = 1usize << self.env_levels;
        let mut rho = DMatrix::zeros(self.dim, self.dim);
        for (j, block) in state.blocks().iter().enumerate() {
            for s in 0..2 {
                for s2 in 0..2 {
                    rho[((2 * j + s) * occupations, (2 * j + s2) * occupations)] = block[(s, s2)];
                }
            }
        }
        rho
    }

    fn reduce(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let occupations = 1usize << self.env_levels;
        let d = 2 * self.num_nodes;
        DMatrix::from_fn(d, d, |a, c| {
            (0..occupations)
                .map(|b| rho[(a * occupations + b, c * occupations + b)])
                .sum()
        })
    }

    fn excitation(&self, rho: &DMatrix<C64>) -> f64 {
        self.excitations
            .iter()
            .enumerate()
            .map(|(i, n)| n * rho[(i, i)].re)
            .sum()
    }
}

fn lattice_matrix(state: &LatticeState) -> DMatrix<C64> {
    let d = 2 * state.num_nodes();
    let mut m = DMatrix::zeros(d, d);
    for (j, block) in state.blocks().iter().enumerate() {
        for s in 0..2 {
            for s2 in 0..2 {
                m[(2 * j + s, 2 * j + s2)] = block[(s, s2)];
            }
        }
    }
    m
}

/// Runs the exact joint evolution on the problem's grid and reports its
/// distance from the Redfield solution at every sampled time.
pub fn exact_oracle_run(problem: &Problem) -> Result<ExactOracleReport, ExperimentError> {
    let n = problem.system.num_nodes();
    let m = problem.env.len();
    if n > MAX_EXACT_NODES {
        return Err(ExperimentError::invalid(
            "system.num_nodes",
            format!("exact oracle supports at most {MAX_EXACT_NODES} nodes, got {n}"),
        ));
    }
    if m > MAX_EXACT_ENV_LEVELS {
        return Err(ExperimentError::invalid(
            "environment",
            format!("exact oracle supports at most {MAX_EXACT_ENV_LEVELS} reservoir levels, got {m}"),
        ));
    }
    let dim = 2 * n * (1usize << m);
    if dim > MAX_EXACT_DIMENSION {
        return Err(ExperimentError::invalid(
            "exact oracle",
            format!("joint dimension {dim} exceeds {MAX_EXACT_DIMENSION}"),
        ));
    }

    let joint = JointSystem::new(problem);
    let grid = problem.grid;
    let reference = problem.equation_in(Mode::Redfield).evolve(&problem.initial, &grid)?;

    let mut rho = joint.embed(&problem.initial);
    let excitation_initial = joint.excitation(&rho);
    let mut times = Vec::with_capacity(reference.len());
    let mut deviation = Vec::with_capacity(reference.len());
    let mut max_excitation_drift = 0.0f64;
    let mut max_trace_drift = 0.0f64;
    let mut sample = 0;
    let mut record = |rho: &DMatrix<C64>, t: f64, sample: &mut usize| {
        let reduced = joint.reduce(rho);
        let redfield = lattice_matrix(&reference.states[*sample]);
        times.push(t);
        deviation.push((reduced - redfield).norm());
        *sample += 1;
    };
    record(&rho, grid.t_start, &mut sample);
    for step in 1..=grid.steps() {
        rho = joint.step(&rho, grid.time_at(step - 1), grid.dt);
        max_excitation_drift = max_excitation_drift.max((joint.excitation(&rho) - excitation_initial).abs());
        max_trace_drift = max_trace_drift.max((rho.trace().re - 1.0).abs());
        if grid.is_sampled(step) {
            record(&rho, grid.time_at(step), &mut sample);
        }
    }

    let mut max_coefficient = 0.0f64;
    for &t in &times {
        for level in Level::ALL {
            let c = problem.params.redfield(level, t)?;
            max_coefficient = max_coefficient.max(c.shift.abs()).max(c.rate.abs());
        }
    }
    let envelope: Vec<f64> = times
        .iter()
        .map(|t| ENVELOPE_FACTOR * max_coefficient * (t - grid.t_start))
        .collect();
    let within_envelope = deviation.iter().zip(&envelope).all(|(d, e)| d <= e);
    let max_deviation = deviation.iter().copied().fold(0.0, f64::max);
    Ok(ExactOracleReport {
        num_nodes: n,
        env_levels: m,
        dimension: dim,
        truncation: "single_occupation".into(),
        times,
        deviation,
        max_deviation,
        max_coefficient,
        envelope,
        within_envelope,
        excitation_initial,
        max_excitation_drift,
        excitation_conserved: max_excitation_drift <= EXCITATION_TOLERANCE,
        max_trace_drift,
    })
}
