//! Models, synthesizes and verifies passive mixer-first receiver front-ends.
//!
//! - [`netcore`]: complex impedances and ABCD two-ports.
//! - [`matchsynth`]: quarter-wave, L-match and tunable L-match synthesis.
//! - [`rxmodel`]: LTI equivalents (input impedance, gain, noise, IIP3).
//! - [`lptv`]: time-domain and conversion-matrix simulation of the switched network.
//! - [`sweep`]: configuration, sweeps, calibration and result files.

pub mod error;
pub mod lptv;
pub mod matchsynth;
pub mod netcore;
pub mod rxmodel;
pub mod sweep;

pub use error::{Error, Result};
