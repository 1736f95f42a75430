//! hybridsim: simulation toolkit for a hybrid quantum device in which a
//! doubly clamped diamond microbeam carrying a single NV-center spin couples
//! to a superconducting coplanar-waveguide cavity.
//!
//! The crate provides
//! - closed-form device physics: beam mechanics, dielectric polarizability,
//!   cavity mode and zero-point field, photon-phonon and spin-phonon coupling
//!   rates, thermal occupation, and decoherence estimates ([`device`]);
//! - dense Lindblad master-equation propagation on truncated composite
//!   Hilbert spaces ([`lindblad`], [`hilbert`], [`states`]);
//! - exact second-moment dynamics for cavity-assisted sideband cooling of the
//!   beam, with closed-form final-occupancy limits ([`cooling`]);
//! - tripartite spin-mechanics-cavity dynamics: vacuum Rabi oscillations,
//!   mechanically dark polaritons, adiabatic state transfer, and the
//!   adiabatically eliminated effective spin-cavity model ([`tripartite`]);
//! - a scenario runner with reproducible CSV/JSON artifacts and a regression
//!   harness ([`config`], [`runner`], [`validate`]).
//!
//! Units: angular frequencies in rad/s with hbar = 1 inside all Hamiltonians,
//! decay rates in 1/s, times in seconds, SI everywhere else.

pub mod constants;
pub mod device;
pub mod error;
pub mod hilbert;
pub mod lindblad;
pub mod ode;
pub mod states;
pub mod timeseries;

pub use error::{Error, Result};
pub use hilbert::{spin_ops, HilbertLayout, QOperator};
pub use lindblad::{evolve, steady_state, EvolveOptions, EvolveResult, LindbladModel};
pub use states::{DensityMatrix, Factor};
pub use timeseries::TimeSeries;
