//! Polarization-basis coherence correlations from classical laser light.
//!
//! A diagonally polarized laser is switched by an EOM into time-separated D
//! and A pulses, split to two parties, passed through each party's
//! Mach-Zehnder interferometer and projected by a HWP + PBS analyzer. Local
//! intensities stay flat under every phase setting, while the selective
//! joint-intensity measurement over paired D/A bins shows Bell-state-like
//! fringes and a CHSH value of 2√2.
//!
//! * [`polarization`]: Jones vectors, optical elements and tagged party fields.
//! * [`algebra`]: product-basis expansion/reduction and closed forms.
//! * [`simulator`]: seeded time-bin Monte Carlo.
//! * [`measurement`]: local statistics, pairing, R estimates, CHSH, Bell labels.
//! * [`wire`] and [`harness`]: two-party streaming and the correlator.
//! * [`cli`], [`config`], [`report`]: command-line front end and CSV output.
//! * [`acceptance`]: reproduction checks behind `polcor verify`.

pub mod acceptance;
pub mod algebra;
pub mod cli;
pub mod config;
pub mod error;
pub mod harness;
pub mod measurement;
pub mod polarization;
pub mod report;
pub mod simulator;
pub mod wire;

pub use error::{Error, Result};
