//! Simulation of resonantly enhanced four-wave mixing in a double-Λ medium
//! under electromagnetically induced transparency.
//!
//! The crate covers four levels of description:
//!
//! * [`adiabatic`]: the five-level interaction matrix and its adiabatic
//!   eigenvalue, which defines the effective field Hamiltonian;
//! * [`classical`]: the semiclassical field equations and their reduction to a
//!   nonlinear pendulum;
//! * [`fock`] and [`ensemble`]: exact quantum evolution in the invariant
//!   number-state sectors of the effective Hamiltonian, for Fock and coherent
//!   pump inputs;
//! * [`meanfield`]: the Gaussian mean-field theory with anomalous
//!   correlations and its closed-form conversion laws.
//!
//! Everything runs in dimensionless units: ξ = (κ/Δ)·ζ for propagation and
//! τ = (κc/Δ)·t for the quantum evolution.

// NaN-rejecting guards are written as `!(x > 0.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adiabatic;
pub mod classical;
pub mod ensemble;
pub mod error;
pub mod fock;
pub mod meanfield;
pub mod numerics;
pub mod params;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use params::{dimensionless_rate, manley_rowe, FieldState, ManleyRowe, PhysicalParams, TrajectoryRecord};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
