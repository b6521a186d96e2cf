use super::hb::{harmonic_transfer, HarmonicResponse};
use super::network::{Ports, SwitchedNetwork};
use super::tran::PssTrace;
use super::waveform::LoWaveform;
use crate::error::Result;
use crate::netcore::{db20, C64};

/// Sideband count used by the harmonic-balance measurements.
pub const DEFAULT_HARMONICS: usize = 24;

/// Steady-state node phasors, from either engine.
pub trait Phasors {
    fn phasor(&self, node: usize, f: f64) -> C64;
    fn ports(&self) -> &Ports;

    /// Differential I and Q outputs at `f`.
    fn iq(&self, f: f64) -> (C64, C64) {
        let o = self.ports().out;
        let i = self.phasor(o[0], f) - self.phasor(o[2], f);
        let q = self.phasor(o[1], f) - self.phasor(o[3], f);
        (i, q)
    }
}

impl Phasors for PssTrace {
    fn phasor(&self, node: usize, f: f64) -> C64 {
        self.dft(&self.voltages[node], f)
    }
    fn ports(&self) -> &Ports {
        &self.ports
    }
}

impl Phasors for HarmonicResponse {
    fn phasor(&self, node: usize, f: f64) -> C64 {
        self.at(node, f)
    }
    fn ports(&self) -> &Ports {
        &self.ports
    }
}

/// Input impedance at the antenna plane, fundamental voltage over current.
pub fn measure_zin<P: Phasors>(p: &P, f_rf: f64) -> C64 {
    let ports = p.ports();
    let v = p.phasor(ports.input, f_rf);
    let i = (C64::new(ports.emf, 0.0) - v) / ports.r_s;
    v / i
}

/// Differential I output at `|f_rf - f_lo|` over the source EMF, in dB.
pub fn measure_conversion_gain<P: Phasors>(p: &P, f_rf: f64, f_lo: f64) -> f64 {
    let (i, _) = p.iq((f_rf - f_lo).abs());
    db20(i.norm() / p.ports().emf)
}

/// I/Q isolation in dB, higher is better. A differential tone at the IF is
/// injected on the I-path baseband capacitors with the antenna silent; the
/// result is the differential I output over the differential Q output.
pub fn measure_iq_isolation(net: &SwitchedNetwork, lo: &LoWaveform, f_rf: f64) -> Result<f64> {
    let f_if = (f_rf - lo.f_lo).abs();
    let mut n = net.source_off();
    let bb = n.ports.bb;
    n.drive = vec![(bb[0], C64::new(1e-3, 0.0)), (bb[2], C64::new(-1e-3, 0.0))];
    let resp = harmonic_transfer(&n, lo, f_if, DEFAULT_HARMONICS)?;
    let (i, q) = resp.iq(f_if);
    Ok(db20(i.norm() / q.norm().max(1e-300)))
}

/// Peak drain-source swing across a conducting switch over the source EMF.
pub fn measure_vds_peak(trace: &PssTrace) -> f64 {
    let mut peak: f64 = 0.0;
    for s in &trace.switches {
        for (i, t) in trace.times.iter().enumerate() {
            if trace.lo.state(s.phase, *t) >= 0.5 {
                let v = trace.voltages[s.a][i] - trace.voltages[s.b][i];
                peak = peak.max(v.abs());
            }
        }
    }
    peak / trace.ports.emf
}
