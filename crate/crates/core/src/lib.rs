//! Discrete-atom noise budget for atomic-ensemble sensors.
//!
//! A vapor cell is not a continuous dielectric: the probe volume holds a
//! finite, Poisson-distributed number of atoms, each with a polarizability
//! that depends on its own random velocity. The sample-mean susceptibility
//! therefore fluctuates (atomic granularity noise, AGN) on top of the optical
//! measurement noise (OMN) of the readout. This crate computes both sides of
//! that budget for a four-level Rydberg electrometry ladder and checks the
//! analytic results against direct simulation.
//!
//! Module map:
//!
//! - [`spectroscopy`]: single-atom polarizability, weak-probe and full
//!   Lindblad steady state.
//! - [`ensemble`]: Maxwell–Boltzmann moments of the polarizability, the
//!   intrinsic variance and the fluctuation parameter `J`.
//! - [`geometry`]: probe volume, atom/photon fluxes, resource ratio `R`.
//! - [`noise`]: the noise budget, scaling law, thresholds and slope-detection
//!   sensitivity.
//! - [`montecarlo`]: the discrete-atom readout simulated trial by trial.

pub mod constants;
pub mod ensemble;
mod error;
pub mod geometry;
pub mod montecarlo;
pub mod noise;
pub mod numerics;
pub mod spectroscopy;

pub use error::{Error, Result};
