//! Engineered frequency-comb noise for qubit control: synthesis, waveform
//! export, spectral checks, qubit simulation, readout estimation and
//! filter-function predictions.

// Range checks are written as `!(x > 0.0)` on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod error;
pub mod filter_theory;
pub mod grid;
pub mod measurement;
pub mod noise_synth;
pub mod qubit_sim;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod waveform;

pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use noise_synth::{NoiseRealization, NoiseSpec, PhasePolicy, Quadrature};
