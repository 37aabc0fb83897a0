//! Simulation of phase-shifting point-diffraction interferometry at
//! few-photon illumination.
//!
//! The pipeline is [`field`] (input wavefront) → [`forward`] (phase-shifted
//! interferograms) → [`sensor`] (shot and readout noise) → [`reconstruct`]
//! (wrapped phase map) → [`qudit`] (state fidelity), with [`experiments`]
//! running seeded Monte-Carlo sweeps over the whole chain.

pub mod circular;
pub mod error;
pub mod experiments;
pub mod field;
pub mod forward;
pub mod mapio;
pub mod qudit;
pub mod reconstruct;
pub mod sensor;

pub use error::{Error, Result};
pub use field::{ComplexField, GridSpec, QuditState, SlitLayout};
pub use forward::{InterferogramSet, PsiConfig};
pub use qudit::{BinningPolicy, FidelityStats};
pub use reconstruct::{MuSign, ReconstructionResult};
pub use sensor::NoiseParams;
