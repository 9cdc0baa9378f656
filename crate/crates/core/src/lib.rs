//! Simulations of two coupled bosonic modes where only mode 1 is monitored
//! by an environment, described three ways:
//!
//! * [`bath`]: exact dynamics with a finite bath of harmonic oscillators,
//! * [`lindblad`]: the Markovian amplitude-damping master equation,
//! * [`collision`]: a stream of two-level atoms, each interacting with mode 1
//!   for a short time and then discarded.
//!
//! [`params`] holds the maps between the bath coupling `Γ`, the damping rate
//! `κ` and the atom coupling `g`; [`analysis`] compares the pictures and
//! locates the transition between the dissipative and Zeno regimes at `κ = 2G`.

pub mod analysis;
pub mod bath;
pub mod cli;
pub mod collision;
pub mod config;
pub mod eigen;
pub mod error;
pub mod lindblad;
pub mod output;
pub mod params;

pub use error::{Error, Result};
pub use params::{
    BathSpec, CollisionSpec, EngineTag, FrequencyLayout, MasterSpec, TimeGrid, TimeSeries,
};
