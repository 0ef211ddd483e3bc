//! Time-dependent Redfield coefficients, their regularized Born–Markov
//! counterparts, and a quadrature route to the same numbers.
//!
//! For level `n` with detunings `ω_nk = ε_n − E_k` and weights `|g_kn|²`:
//!
//! ```text
//! Γ_n(t) = Σ_k |g_kn|²/ω_nk · (1 − cos ω_nk t)      (level shift)
//! γ_n(t) = Σ_k |g_kn|²/ω_nk · sin ω_nk t            (transfer rate)
//! ```
//!
//! Both are the real and imaginary parts of `Σ_k |g_kn|² ∫₀ᵗ e^{iω_nk s} ds`,
//! which is what [`CoefficientParams::quadrature_oracle`] integrates directly.

use crate::model::{CouplingSpec, EnvSpec, ModelError, SystemSpec};
use crate::quadrature::{self, QuadratureError};
use num_complex::Complex64 as C64;
use thiserror::Error;

/// Absolute tolerance used by the quadrature oracle.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoefficientError {
    #[error("time must be finite and non-negative, got {0}")]
    BadTime(f64),
    #[error("regularizer eta must be finite and positive, got {0}")]
    BadEta(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// One of the two internal energy levels of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Ground = 0,
    Excited = 1,
}

impl Level {
    pub const ALL: [Level; 2] = [Level::Ground, Level::Excited];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// A single `(Γ, γ)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Coefficients {
    pub shift: f64,
    pub rate: f64,
}

impl std::ops::Add for Coefficients {
    type Output = Coefficients;

    fn add(self, rhs: Self) -> Self {
        Self {
            shift: self.shift + rhs.shift,
            rate: self.rate + rhs.rate,
        }
    }
}

/// Exponential cutoff `e^{−ηs}` applied to the semi-infinite memory integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovRegularizer {
    eta: f64,
}

impl MarkovRegularizer {
    pub fn new(eta: f64) -> Result<Self, CoefficientError> {
        if !eta.is_finite() || eta <= 0.0 {
            return Err(CoefficientError::BadEta(eta));
        }
        Ok(Self { eta })
    }

    /// `η = factor · min_{n,k} |ω_nk|`.
    pub fn relative(params: &CoefficientParams, factor: f64) -> Result<Self, CoefficientError> {
        Self::new(factor * params.min_abs_detuning())
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

/// Detunings and squared couplings, per level and reservoir mode.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientParams {
    // [level][k]
    detuning: [Vec<f64>; 2],
    weight: [Vec<f64>; 2],
}

impl CoefficientParams {
    pub fn new(system: &SystemSpec, env: &EnvSpec, coupling: &CouplingSpec) -> Result<Self, CoefficientError> {
        env.check_against(system)?;
        coupling.check_against(env)?;
        let eps = system.levels();
        let detuning = [0, 1].map(|n| env.levels().iter().map(|e| eps[n] - e).collect());
        let weight = [0, 1].map(|n| coupling.rows().iter().map(|row| row[n].norm_sqr()).collect());
        Ok(Self { detuning, weight })
    }

    /// Builds directly from detunings `ω_nk` and weights `|g_kn|²`. Zero
    /// weights are allowed here (they switch a channel off).
    pub fn from_detunings(detuning: [Vec<f64>; 2], weight: [Vec<f64>; 2]) -> Result<Self, CoefficientError> {
        for n in 0..2 {
            if detuning[n].len() != weight[n].len() {
                return Err(ModelError::CouplingShape {
                    got: weight[n].len(),
                    expected: detuning[n].len(),
                }
                .into());
            }
            if detuning[n].iter().chain(&weight[n]).any(|x| !x.is_finite()) {
                return Err(ModelError::NonFinite("coefficient parameters").into());
            }
            if let Some(&w) = detuning[n].iter().find(|w| **w == 0.0) {
                return Err(ModelError::Degenerate { system: w, env: w }.into());
            }
        }
        Ok(Self { detuning, weight })
    }

    /// Same detunings with every weight set to zero.
    pub fn decoupled(&self) -> Self {
        Self {
            detuning: self.detuning.clone(),
            weight: self.weight.clone().map(|w| vec![0.0; w.len()]),
        }
    }

    pub fn detunings(&self, level: Level) -> &[f64] {
        &self.detuning[level.index()]
    }

    pub fn weights(&self, level: Level) -> &[f64] {
        &self.weight[level.index()]
    }

    pub fn min_abs_detuning(&self) -> f64 {
        self.detuning
            .iter()
            .flatten()
            .map(|w| w.abs())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_detuning(&self) -> f64 {
        self.detuning.iter().flatten().map(|w| w.abs()).fold(0.0, f64::max)
    }

    pub fn is_decoupled(&self) -> bool {
        self.weight.iter().flatten().all(|w| *w == 0.0)
    }

    fn modes(&self, level: Level) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = level.index();
        self.detuning[n].iter().copied().zip(self.weight[n].iter().copied())
    }

    /// `γ_n(t)`. May be negative.
    pub fn redfield_rate(&self, level: Level, t: f64) -> Result<f64, CoefficientError> {
        check_time(t)?;
        Ok(self.modes(level).map(|(w, g2)| g2 / w * (w * t).sin()).sum())
    }

    /// `Γ_n(t)`.
    pub fn redfield_shift(&self, level: Level, t: f64) -> Result<f64, CoefficientError> {
        check_time(t)?;
        Ok(self.modes(level).map(|(w, g2)| g2 / w * (1.0 - (w * t).cos())).sum())
    }

    pub fn redfield(&self, level: Level, t: f64) -> Result<Coefficients, CoefficientError> {
        check_time(t)?;
        let mut c = Coefficients::default();
        for (w, g2) in self.modes(level) {
            let (s, co) = (w * t).sin_cos();
            c.shift += g2 / w * (1.0 - co);
            c.rate += g2 / w * s;
        }
        Ok(c)
    }

    /// Constant coefficients with the sine integral assigned to `Γ` and the
    /// cosine integral to `γ`, each regularized by `e^{−ηs}`:
    /// `Γ = Σ|g|² ω/(η²+ω²)`, `γ = Σ|g|² η/(η²+ω²)`.
    pub fn markov(&self, level: Level, reg: MarkovRegularizer) -> Coefficients {
        let eta = reg.eta;
        let mut c = Coefficients::default();
        for (w, g2) in self.modes(level) {
            let denom = eta * eta + w * w;
            c.shift += g2 * w / denom;
            c.rate += g2 * eta / denom;
        }
        c
    }

    /// `(Γ_n(t), γ_n(t))` by numerically integrating `Σ_k |g_kn|² e^{iω_nk s}`
    /// over `[0, t]`.
    pub fn quadrature_oracle(&self, level: Level, t: f64) -> Result<Coefficients, CoefficientError> {
        check_time(t)?;
        let modes: Vec<(f64, f64)> = self.modes(level).collect();
        let max_w = modes.iter().map(|(w, _)| w.abs()).fold(0.0, f64::max);
        let integral = quadrature::integrate_complex(
            |s| {
                modes.iter().fold(C64::new(0.0, 0.0), |acc, &(w, g2)| {
                    let (sin, cos) = (w * s).sin_cos();
                    acc + g2 * C64::new(cos, sin)
                })
            },
            0.0,
            t,
            quadrature::panels_for(t, max_w),
            ORACLE_TOLERANCE,
        )?;
        Ok(Coefficients {
            shift: integral.im,
            rate: integral.re,
        })
    }
}

fn check_time(t: f64) -> Result<(), CoefficientError> {
    if !t.is_finite() || t < 0.0 {
        return Err(CoefficientError::BadTime(t));
    }
    Ok(())
}
