//! Feedback-controlled Kuramoto model on uniform graphs.
//!
//! The library simulates the controlled Kuramoto model with uniformly spaced
//! natural frequencies on complete, random dense and random sparse graphs,
//! enumerates all of its synchronized equilibria through their sign-pattern
//! parametrization, locates their saddle-node and pitchfork bifurcations,
//! classifies spectral stability, and solves the continuum-limit
//! synchronized profiles for discrete-to-continuum comparisons.
//!
//! Modules:
//! - [`model`]: parameters, frequencies, graphs and vector fields;
//! - [`integrator`]: adaptive Runge-Kutta integration and steady states;
//! - [`equilibria`]: the 2^n sign-pattern equilibrium families;
//! - [`spectra`]: Jacobians, real spectra and stability classes;
//! - [`bifurcation`]: saddle-node and pitchfork points, branch diagrams;
//! - [`continuum`]: continuum-limit profiles, embeddings and L2 distances.

pub mod bifurcation;
pub mod continuum;
pub mod equilibria;
pub mod error;
pub mod integrator;
pub mod model;
pub mod spectra;

pub use error::{Error, Result};
