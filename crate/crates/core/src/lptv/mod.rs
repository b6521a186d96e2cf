//! Switched-network oracle: a time-domain periodic-steady-state simulator
//! and a harmonic-balance conversion-matrix solver of the same circuit.

mod hb;
mod measure;
mod network;
mod tran;
mod waveform;

pub use hb::{harmonic_transfer, HarmonicResponse};
pub use measure::{
    measure_conversion_gain, measure_iq_isolation, measure_vds_peak, measure_zin, Phasors, DEFAULT_HARMONICS,
};
pub use network::{Element, Ports, Switch, SwitchedNetwork, GROUND, IDEAL_AMP_GAIN};
pub use tran::{commensurate_window, simulate_pss, transient, PssTrace, Transient, MAX_WINDOW_PERIODS};
pub use waveform::{LoWaveform, PhaseDrive};

/// Default time steps per LO period.
pub const DEFAULT_STEPS_PER_PERIOD: usize = 1024;
pub const DEFAULT_MAX_PERIODS: usize = 2000;
pub const DEFAULT_TOL: f64 = 1e-6;
