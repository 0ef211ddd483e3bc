//! Dissipation-driven transport of a two-level excitation around a ring of
//! nodes, each coupled to a discrete bosonic reservoir.
//!
//! The per-node density-matrix blocks obey a time-local master equation whose
//! coefficients are either the finite-time Redfield integrals or their
//! regularized Born-Markov limits. [`experiments`] wraps the pipeline in
//! config-driven runs that write CSV and JSON artifacts.

pub mod coefficients;
pub mod experiments;
pub mod integrator;
pub mod model;
pub mod observables;
pub mod quadrature;
