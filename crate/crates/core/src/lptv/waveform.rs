use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::netcore::{omega, C64};
use crate::rxmodel::ReceiverSpec;

/// How a phase is driven.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseDrive {
    Lo,
    On,
    Off,
}

/// Multi-phase LO with linear (in conductance) edges of length `rise_time`,
/// centred on the ideal switching instants. Phase `p` is high from
/// `p T / N + delay` for `duty T`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoWaveform {
    pub f_lo: f64,
    pub duty: f64,
    pub n_phases: usize,
    pub rise_time: f64,
    pub delay: f64,
    pub drive: Vec<PhaseDrive>,
}

impl LoWaveform {
    pub fn new(f_lo: f64, duty: f64, n_phases: usize, rise_time: f64) -> Result<Self> {
        if !(f_lo > 0.0 && f_lo.is_finite()) {
            return Err(Error::param("f_lo", "must be positive"));
        }
        if !(duty > 0.0 && duty <= 1.0) {
            return Err(Error::param("duty", format!("{duty} outside (0, 1]")));
        }
        if n_phases == 0 {
            return Err(Error::param("n_phases", "must be at least 1"));
        }
        let period = 1.0 / f_lo;
        if !(rise_time >= 0.0) || (duty < 1.0 && rise_time > duty.min(1.0 - duty) * period) {
            return Err(Error::param("rise_time", "must fit inside the pulse and the gap"));
        }
        Ok(LoWaveform {
            f_lo,
            duty,
            n_phases,
            rise_time,
            delay: 0.0,
            drive: vec![PhaseDrive::Lo; n_phases],
        })
    }

    pub fn from_spec(spec: &ReceiverSpec) -> Result<Self> {
        Self::new(spec.f_lo, spec.duty, spec.n_phases, spec.rise_fraction / spec.f_lo)
    }

    pub fn period(&self) -> f64 {
        1.0 / self.f_lo
    }

    pub fn with_delay(mut self, delay: f64) -> Self {
        self.delay = delay;
        self
    }

    pub fn with_drive(mut self, phase: usize, drive: PhaseDrive) -> Self {
        self.drive[phase] = drive;
        self
    }

    pub fn all(mut self, drive: PhaseDrive) -> Self {
        self.drive.iter_mut().for_each(|d| *d = drive);
        self
    }

    /// Overlap between adjacent phases, zero without overlap.
    pub fn overlap_tau(&self) -> f64 {
        crate::rxmodel::overlap_tau(self.duty, self.n_phases, self.f_lo)
    }

    fn start(&self, phase: usize) -> f64 {
        phase as f64 * self.period() / self.n_phases as f64 + self.delay
    }

    /// Switch state in [0, 1] of `phase` at time `t`.
    pub fn state(&self, phase: usize, t: f64) -> f64 {
        match self.drive[phase] {
            PhaseDrive::On => return 1.0,
            PhaseDrive::Off => return 0.0,
            PhaseDrive::Lo => {}
        }
        if self.duty >= 1.0 {
            return 1.0;
        }
        let period = self.period();
        let width = self.duty * period;
        // Position relative to the rising edge, wrapped around the pulse centre.
        let x = (t - self.start(phase) - width / 2.0 + period / 2.0).rem_euclid(period) - period / 2.0 + width / 2.0;
        if self.rise_time == 0.0 {
            return if (0.0..width).contains(&x) { 1.0 } else { 0.0 };
        }
        let r = self.rise_time;
        let up = ((x + r / 2.0) / r).clamp(0.0, 1.0);
        let down = ((width + r / 2.0 - x) / r).clamp(0.0, 1.0);
        up.min(down)
    }

    /// Fourier coefficient `m` of [`state`](Self::state):
    /// `state(t) = sum_m c_m exp(j m w_LO t)`.
    pub fn fourier(&self, phase: usize, m: i64) -> C64 {
        match self.drive[phase] {
            PhaseDrive::On => return if m == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) },
            PhaseDrive::Off => return C64::new(0.0, 0.0),
            PhaseDrive::Lo => {}
        }
        if self.duty >= 1.0 {
            return if m == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        }
        if m == 0 {
            return C64::new(self.duty, 0.0);
        }
        let w = omega(self.f_lo) * m as f64;
        let centre = self.start(phase) + self.duty * self.period() / 2.0;
        let mag = self.duty * sinc(m as f64 * PI * self.duty) * sinc(w * self.rise_time / 2.0);
        C64::from_polar(mag, -w * centre)
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        x.sin() / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlap_follows_duty() {
        let lo = LoWaveform::new(30e9, 0.25, 4, 0.0).unwrap();
        assert_eq!(lo.overlap_tau(), 0.0);
        let lo = LoWaveform::new(30e9, 0.5, 4, 0.0).unwrap();
        assert!((lo.overlap_tau() - lo.period() / 4.0).abs() < 1e-24);
    }

    #[test]
    fn phases_are_shifted_copies() {
        let lo = LoWaveform::new(1.0, 0.5, 4, 0.05).unwrap();
        for i in 0..200 {
            let t = i as f64 / 200.0;
            for p in 1..4 {
                let shifted = lo.state(0, t - p as f64 / 4.0);
                assert!((lo.state(p, t) - shifted).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fourier_matches_numeric_integral() {
        for &(duty, rise) in &[(0.25, 0.0), (0.5, 0.05), (0.4, 0.1)] {
            let lo = LoWaveform::new(1.0, duty, 4, rise).unwrap().with_delay(0.013);
            let n = 20000;
            for m in [0i64, 1, 2, 3, -5] {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..n {
                    let t = (i as f64 + 0.5) / n as f64;
                    acc += lo.state(2, t) * C64::from_polar(1.0, -2.0 * PI * m as f64 * t);
                }
                acc /= n as f64;
                assert!((acc - lo.fourier(2, m)).norm() < 1e-3, "{duty} {m}");
            }
        }
    }

    #[test]
    fn ramp_is_linear_and_centred() {
        let lo = LoWaveform::new(1.0, 0.5, 4, 0.1).unwrap();
        assert!((lo.state(0, 0.0) - 0.5).abs() < 1e-12);
        assert!((lo.state(0, 0.025) - 0.75).abs() < 1e-12);
        assert!((lo.state(0, 0.5) - 0.5).abs() < 1e-12);
        assert_eq!(lo.state(0, 0.25), 1.0);
        assert_eq!(lo.state(0, 0.75), 0.0);
    }

    #[test]
    fn rejects_bad_rise() {
        assert!(LoWaveform::new(1.0, 0.25, 4, 0.3).is_err());
    }
}
