//! Simulation and analysis toolkit for open quantum discrete modern Hopfield
//! networks.
//!
//! The crate is split by model layer:
//!
//! * [`classical`] – Hebbian and dense (modern) Hopfield retrieval, plus
//!   Monte-Carlo storage-capacity experiments.
//! * [`meanfield`] – the overlap equations of motion in the thermodynamic
//!   limit, fixed-step integration and trajectory classification.
//! * [`fixedpoint`] – the single-pattern self-consistency equation, linear
//!   stability and the curves where the number of fixed points changes.
//! * [`lindblad`] – an exact dense master-equation solver for a handful of
//!   spins, used as a brute-force reference for the mean-field limit.
//! * [`phasemap`] – (T, Ω) sweeps that combine the analytic and dynamical
//!   pictures into phase labels, with CSV and PNG output.

pub mod classical;
pub mod error;
pub mod fixedpoint;
pub mod lindblad;
pub mod meanfield;
pub mod phasemap;
pub mod rk4;

mod exponent;

pub use error::{Error, Result};
pub use exponent::Exponent;
pub use meanfield::{ModelParams, OverlapState, Trajectory};

/// Crate version, recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
