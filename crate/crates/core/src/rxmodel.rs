//! LTI equivalent models of the mixer-first receiver.
//!
//! The equivalent circuit is: source (`r_s`) -> matching network (if any) ->
//! switch resistance `r_sw` -> a node loaded by the re-radiation resistance
//! `r_sh`, the overlap resistance `r_ol`, and the reflected baseband impedance
//! `gamma * Z_bb`. With a feedback amplifier `Z_bb` is the Miller impedance
//! `r_f / (1 + A)` in parallel with `c_bb`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::matchsynth::{self, MatchSpec};
use crate::netcore::{self, input_impedance, omega, parallel, Termination, C64, J};

/// Open-loop gain of the baseband amplifier, 36 dB.
pub const DEFAULT_A_OL: f64 = 63.095_734_448_019_32;
pub const DEFAULT_R_SW: f64 = 12.0;
pub const DEFAULT_R_F: f64 = 1000.0;
pub const DEFAULT_R_S: f64 = 50.0;
pub const DEFAULT_C_BB: f64 = 2e-12;
pub const DEFAULT_R_OFF: f64 = 1e6;
pub const DEFAULT_RISE_FRACTION: f64 = 0.05;
pub const DEFAULT_K_MAX: usize = 99;
/// Overlap-resistance constant fitted against the switched-network oracle.
pub const DEFAULT_K_CAL: f64 = 0.63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Architecture {
    MillerMatched,
    ShuntResistor,
    PerPathResistor,
    QuarterWaveDivider,
    LMatch,
    TunableLMatch,
}

impl Architecture {
    pub const ALL: [Architecture; 6] = [
        Architecture::MillerMatched,
        Architecture::ShuntResistor,
        Architecture::PerPathResistor,
        Architecture::QuarterWaveDivider,
        Architecture::LMatch,
        Architecture::TunableLMatch,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Architecture::MillerMatched => "MillerMatched",
            Architecture::ShuntResistor => "ShuntResistor",
            Architecture::PerPathResistor => "PerPathResistor",
            Architecture::QuarterWaveDivider => "QuarterWaveDivider",
            Architecture::LMatch => "LMatch",
            Architecture::TunableLMatch => "TunableLMatch",
        }
    }

    pub fn needs_match(&self) -> bool {
        matches!(
            self,
            Architecture::QuarterWaveDivider | Architecture::LMatch | Architecture::TunableLMatch
        )
    }

    fn match_kind(&self) -> Option<&'static str> {
        match self {
            Architecture::QuarterWaveDivider => Some("QuarterWave"),
            Architecture::LMatch => Some("LMatch"),
            Architecture::TunableLMatch => Some("TunableLMatch"),
            _ => None,
        }
    }
}

impl std::str::FromStr for Architecture {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Architecture::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::param("architecture", format!("unknown architecture `{s}`")))
    }
}

/// Full front-end description.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverSpec {
    pub r_s: f64,
    pub r_sw: f64,
    pub r_f: f64,
    /// Open-loop gain; `f64::INFINITY` is an ideal virtual ground.
    pub a_ol: f64,
    pub c_bb: f64,
    pub f_lo: f64,
    pub n_phases: usize,
    pub duty: f64,
    pub architecture: Architecture,
    pub matching: Option<MatchSpec>,
    /// Input shunt resistor of `ShuntResistor`.
    pub r_shunt: f64,
    /// Series resistor per path of `PerPathResistor`.
    pub r_per_path: f64,
    /// LO edge time as a fraction of the LO period.
    pub rise_fraction: f64,
    pub r_off: f64,
    pub a_mixers: f64,
    pub k_cal: f64,
    pub k_max: usize,
    pub v_iip3_mixer: f64,
    pub v_iip3_bb: f64,
    /// Input-referred baseband amplifier noise, added to the noise factor.
    pub bb_noise_excess: f64,
    /// Single-pole amplifier corner; `None` is memoryless.
    pub amp_pole_hz: Option<f64>,
}

impl ReceiverSpec {
    /// Nominal design point: 12 ohm switches, 1 kohm feedback, 36 dB amplifier,
    /// 50 % duty quadrature LO.
    pub fn nominal(architecture: Architecture, f_lo: f64) -> Self {
        ReceiverSpec {
            r_s: DEFAULT_R_S,
            r_sw: DEFAULT_R_SW,
            r_f: DEFAULT_R_F,
            a_ol: DEFAULT_A_OL,
            c_bb: DEFAULT_C_BB,
            f_lo,
            n_phases: 4,
            duty: 0.5,
            architecture,
            matching: None,
            r_shunt: DEFAULT_R_S,
            r_per_path: 50.0,
            rise_fraction: DEFAULT_RISE_FRACTION,
            r_off: DEFAULT_R_OFF,
            a_mixers: 1.0,
            k_cal: DEFAULT_K_CAL,
            k_max: DEFAULT_K_MAX,
            v_iip3_mixer: 0.5,
            v_iip3_bb: 0.5,
            bb_noise_excess: 0.0,
            amp_pole_hz: None,
        }
    }

    /// [`nominal`](Self::nominal) with a matching network synthesized at `f_lo`.
    pub fn nominal_matched(architecture: Architecture, f_lo: f64) -> Result<Self> {
        let mut spec = Self::nominal(architecture, f_lo);
        spec.synthesize_match(f_lo, f_lo)?;
        Ok(spec)
    }

    /// Replaces `matching` with a fresh design at `f_design`; `f_band_low` sizes
    /// the tunable inductor.
    pub fn synthesize_match(&mut self, f_design: f64, f_band_low: f64) -> Result<()> {
        let r_high = 2.0 * self.r_s;
        self.matching = match self.architecture {
            Architecture::QuarterWaveDivider => {
                Some(matchsynth::synth_quarter_wave(self.r_sw, self.r_s, f_design)?)
            }
            Architecture::LMatch => Some(matchsynth::synth_l_match(self.r_sw, r_high, f_design)?),
            Architecture::TunableLMatch => Some(matchsynth::synth_tunable_l_match(
                self.r_sw, r_high, f_band_low, f_design,
            )?),
            _ => None,
        };
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("{v} must be positive")))
            }
        };
        pos("r_s", self.r_s)?;
        pos("r_sw", self.r_sw)?;
        pos("r_f", self.r_f)?;
        pos("f_lo", self.f_lo)?;
        pos("r_off", self.r_off)?;
        if !(self.c_bb > 0.0) {
            return Err(Error::param("c_bb", "must be positive"));
        }
        if !(self.a_ol >= 0.0) {
            return Err(Error::param("a_ol", format!("{} must be >= 0", self.a_ol)));
        }
        if !(self.duty > 0.0 && self.duty <= 0.5) {
            return Err(Error::param("duty", format!("{} outside (0, 0.5]", self.duty)));
        }
        if self.n_phases != 4 {
            return Err(Error::param("n_phases", format!("{} (only 4 supported)", self.n_phases)));
        }
        if !(self.rise_fraction >= 0.0 && self.rise_fraction < self.duty) {
            return Err(Error::param("rise_fraction", "must be in [0, duty)"));
        }
        if self.k_cal <= 0.0 {
            return Err(Error::param("k_cal", "must be positive"));
        }
        if self.architecture == Architecture::ShuntResistor {
            pos("r_shunt", self.r_shunt)?;
        }
        if self.architecture == Architecture::PerPathResistor && !(self.r_per_path >= 0.0) {
            return Err(Error::param("r_per_path", "must be >= 0"));
        }
        match (self.architecture.match_kind(), &self.matching) {
            (Some(_), None) => return Err(Error::MissingMatch(self.architecture.name())),
            (Some(kind), Some(m)) if m.kind_name() != kind => {
                return Err(Error::MatchKindMismatch {
                    arch: self.architecture.name(),
                    found: m.kind_name(),
                })
            }
            (_, Some(m)) => m.validate()?,
            _ => {}
        }
        Ok(())
    }

    /// Overlap time between adjacent LO phases in seconds.
    pub fn overlap_tau(&self) -> f64 {
        overlap_tau(self.duty, self.n_phases, self.f_lo)
    }

    /// Resistance of one mixer path used by the overlap model: switch plus
    /// the Thevenin source resistance in the same frame as the noise formula.
    pub fn r_path(&self) -> f64 {
        match self.architecture {
            Architecture::PerPathResistor => self.r_sw + self.r_s + self.r_per_path,
            Architecture::ShuntResistor => {
                self.r_sw + self.r_s * self.r_shunt / (self.r_s + self.r_shunt)
            }
            _ => self.r_sw + self.r_s,
        }
    }

    /// Amplifier gain at `f` (single pole if configured).
    pub fn amp_gain(&self, f: f64) -> C64 {
        match self.amp_pole_hz {
            Some(fp) if self.a_ol.is_finite() => C64::new(self.a_ol, 0.0) / (C64::new(1.0, f / fp)),
            _ => C64::new(self.a_ol, 0.0),
        }
    }

    /// Baseband node impedance of one path at `f_bb`.
    pub fn baseband_impedance(&self, f_bb: f64) -> C64 {
        let a = self.amp_gain(f_bb);
        if !a.re.is_finite() {
            return C64::new(0.0, 0.0);
        }
        let y = (a + 1.0) / self.r_f + J * omega(f_bb) * self.c_bb;
        C64::new(1.0, 0.0) / y
    }

    /// Impedance seen from the mixer (switch included) towards the antenna.
    pub fn front_end_impedance(&self, f: f64) -> Result<C64> {
        let r_sw = C64::new(self.r_sw, 0.0);
        let r_s = C64::new(self.r_s, 0.0);
        Ok(match self.architecture {
            Architecture::MillerMatched => r_sw + r_s,
            Architecture::ShuntResistor => r_sw + parallel(&[r_s, C64::new(self.r_shunt, 0.0)]),
            Architecture::PerPathResistor => r_sw + r_s + self.r_per_path,
            _ => {
                let m = self.matching.as_ref().ok_or(Error::MissingMatch(self.architecture.name()))?;
                let branch = m.branch(f);
                let other = input_impedance(&branch, &Termination::resistor(self.r_sw)?)?;
                let source = Termination::new(parallel(&[r_s, other]))?;
                r_sw + input_impedance(&branch.reversed(), &source)?
            }
        })
    }
}

/// `(N / pi^2) sin^2(pi / N)`; 2/pi^2 for four phases.
pub fn gamma(n_phases: usize) -> f64 {
    let n = n_phases as f64;
    n / (PI * PI) * (PI / n).sin().powi(2)
}

/// Overlap time `(duty - 1/N) T`, zero when phases do not overlap.
pub fn overlap_tau(duty: f64, n_phases: usize, f_lo: f64) -> f64 {
    let excess = duty - 1.0 / n_phases as f64;
    if excess > 1e-12 {
        excess / f_lo
    } else {
        0.0
    }
}

/// Fourier magnitude of a rectangular LO pulse at harmonic `k`, `sin(k pi d) / pi`.
pub fn lo_fourier(k: usize, duty: f64) -> f64 {
    if k == 0 {
        duty
    } else {
        (k as f64 * PI * duty).sin() / (PI * k as f64)
    }
}

/// `|c_k / c_1|^2` for a pulse of the given duty.
pub fn harmonic_weight(k: usize, duty: f64) -> f64 {
    (lo_fourier(k, duty) / lo_fourier(1, duty)).powi(2)
}

/// Miller input impedance `gamma r_f / (1 + A)`.
pub fn miller_input_impedance(gamma: f64, r_f: f64, a_ol: f64) -> f64 {
    if a_ol.is_infinite() {
        0.0
    } else {
        gamma * r_f / (1.0 + a_ol)
    }
}

/// Noise factor of the LTI equivalent (baseband amplifier noise excluded).
pub fn noise_factor(r_sw: f64, r_s: f64, r_sh: f64, r_ol: f64) -> f64 {
    let loop_r = r_sw + r_s;
    let shunt = |r: f64| {
        if r.is_infinite() {
            0.0
        } else {
            (r / r_s) * (loop_r / r).powi(2)
        }
    };
    1.0 + r_sw / r_s + shunt(r_sh) + shunt(r_ol)
}

pub fn noise_figure_db(f: f64) -> f64 {
    netcore::db10(f)
}

/// Overlap resistance `k_cal r_path / (w_LO tau)`; infinite without overlap.
pub fn r_ol_estimate(r_path: f64, f_lo: f64, tau_overlap: f64, k_cal: f64) -> f64 {
    if tau_overlap <= 0.0 {
        f64::INFINITY
    } else {
        k_cal * r_path / (omega(f_lo) * tau_overlap)
    }
}

/// Re-radiation resistance: the front-end conductance at odd LO harmonics
/// `3..=k_max`, each weighted by `|c_k / c_1|^2`, combined in parallel.
pub fn r_sh_estimate<F>(front_end_z: F, f_lo: f64, k_max: usize, duty: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<C64>,
{
    let mut g = 0.0;
    for k in (3..=k_max).step_by(2) {
        let z = front_end_z(k as f64 * f_lo)?;
        if z.is_finite() && z.norm() > 0.0 {
            g += harmonic_weight(k, duty) * (C64::new(1.0, 0.0) / z).re.max(0.0);
        }
    }
    Ok(if g > 0.0 { 1.0 / g } else { f64::INFINITY })
}

/// Drain-source swing over source EMF for an ideal matching network.
pub fn vds_ratio(r_sw: f64, r_s: f64) -> f64 {
    0.5 * (r_sw / (2.0 * r_s)).sqrt()
}

/// Overall input-referred IIP3 amplitude in volts.
pub fn iip3_cascade(a_mn: f64, a_mixers: f64, v_iip3_mixer: f64, v_iip3_bb: f64) -> f64 {
    let inv2 = |v: f64| if v.is_infinite() { 0.0 } else { 1.0 / (v * v) };
    let s = a_mn * a_mn * inv2(v_iip3_mixer) + a_mn * a_mn * a_mixers * a_mixers * inv2(v_iip3_bb);
    if s == 0.0 {
        f64::INFINITY
    } else {
        1.0 / s.sqrt()
    }
}

/// Sinusoidal peak voltage into a 50 ohm reference, in dBm.
pub fn volts_to_dbm(v_peak: f64) -> f64 {
    netcore::db10(v_peak * v_peak / (2.0 * 50.0) / 1e-3)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LtiEquivalent {
    pub gamma: f64,
    pub r_sh: f64,
    pub r_ol: f64,
    pub z_in: C64,
    pub a_mn: f64,
    pub a_mixers: f64,
    /// Node impedance behind the switch: `gamma Z_bb || r_sh || r_ol`.
    pub z_node: C64,
    /// Load seen by one matching branch (or by the source for direct drive).
    pub z_term: C64,
    /// RF current into one mixer termination per volt of source EMF.
    pub i_term: C64,
    /// Power delivered into the mixer terminations over available power.
    pub transducer_gain: f64,
    pub f_if: f64,
}

/// Assembles the LTI equivalent of `spec` at `f_rf`.
pub fn build_lti(spec: &ReceiverSpec, f_rf: f64) -> Result<LtiEquivalent> {
    spec.validate()?;
    let g = gamma(spec.n_phases);
    let f_if = (f_rf - spec.f_lo).abs();
    let r_sh = r_sh_estimate(|f| spec.front_end_impedance(f), spec.f_lo, spec.k_max, spec.duty)?;
    let r_ol = r_ol_estimate(spec.r_path(), spec.f_lo, spec.overlap_tau(), spec.k_cal);
    let z_node = parallel(&[
        spec.baseband_impedance(f_if) * g,
        C64::new(r_sh, 0.0),
        C64::new(r_ol, 0.0),
    ]);
    let z_node = if z_node.is_finite() { z_node } else { C64::new(0.0, 0.0) };
    let mut z_term = z_node + spec.r_sw;
    if spec.architecture == Architecture::PerPathResistor {
        z_term += spec.r_per_path;
    }
    let r_s = spec.r_s;
    let one = C64::new(1.0, 0.0);

    let (z_in, a_mn, i_term, transducer_gain) = match spec.architecture {
        Architecture::MillerMatched | Architecture::PerPathResistor => {
            (z_term, 1.0, one / (z_term + r_s), 1.0)
        }
        Architecture::ShuntResistor => {
            let z_in = parallel(&[C64::new(spec.r_shunt, 0.0), z_term]);
            let v_in = z_in / (z_in + r_s);
            let i = v_in / z_term;
            (z_in, 1.0, i, 8.0 * r_s * i.norm_sqr() * z_term.re)
        }
        _ => {
            let m = spec.matching.as_ref().ok_or(Error::MissingMatch(spec.architecture.name()))?;
            let load = Termination::new(z_term)?;
            let z_in = m.divider_input(f_rf, &load)?;
            let v_in = z_in / (z_in + r_s);
            let a = m.branch(f_rf).voltage_gain(&load)?;
            let i = v_in * a / z_term;
            // Two branches share the available power.
            let tg = 2.0 * 8.0 * r_s * i.norm_sqr() * z_term.re / 2.0;
            (z_in, a.norm(), i, tg)
        }
    };

    Ok(LtiEquivalent {
        gamma: g,
        r_sh,
        r_ol,
        z_in,
        a_mn,
        a_mixers: spec.a_mixers,
        z_node,
        z_term,
        i_term,
        transducer_gain,
        f_if,
    })
}

/// Differential baseband output over source EMF, in dB.
///
/// Chain: source divider and matching network give the RF current `i_term`
/// into one mixer path. Of that, the share `z_node / (gamma Z_bb)` reaches the
/// baseband branch; the rest is lost in `r_sh` and `r_ol`. The switch passes
/// `c_1 = sin(pi d) / pi` of it to baseband at the IF. The feedback amplifier converts it to voltage with
/// transimpedance `A / ((1 + A) / r_f + j w_IF c_bb)`. The I output is the
/// difference of two paths in antiphase, hence the factor 2.
pub fn conversion_gain_lti(spec: &ReceiverSpec, lti: &LtiEquivalent, _f_rf: f64) -> f64 {
    let c1 = lo_fourier(1, spec.duty);
    let z_bb = spec.baseband_impedance(lti.f_if) * lti.gamma;
    let share = if z_bb.norm() > 0.0 { (lti.z_node / z_bb).norm() } else { 1.0 };
    let i_bb = c1 * share * lti.i_term.norm();
    let a = spec.amp_gain(lti.f_if);
    let z_t = if !a.re.is_finite() {
        spec.r_f
    } else {
        (a / ((a + 1.0) / spec.r_f + J * omega(lti.f_if) * spec.c_bb)).norm()
    };
    netcore::db20(2.0 * lti.a_mixers * i_bb * z_t)
}

/// Noise factor of the whole architecture.
///
/// Direct-drive variants use the LTI noise equation directly. The input shunt
/// resistor is folded into a Thevenin source `r_s || r_shunt`. Matched
/// variants divide by the transducer gain of the matching network, which is
/// one at the design point of a lossless network.
pub fn noise_factor_arch(spec: &ReceiverSpec, lti: &LtiEquivalent) -> f64 {
    let extra = spec.bb_noise_excess;
    match spec.architecture {
        Architecture::MillerMatched => noise_factor(spec.r_sw, spec.r_s, lti.r_sh, lti.r_ol) + extra,
        Architecture::PerPathResistor => {
            noise_factor(spec.r_sw + spec.r_per_path, spec.r_s, lti.r_sh, lti.r_ol) + extra
        }
        Architecture::ShuntResistor => {
            let r_th = spec.r_s * spec.r_shunt / (spec.r_s + spec.r_shunt);
            let alpha = spec.r_shunt / (spec.r_s + spec.r_shunt);
            let f_th = noise_factor(spec.r_sw, r_th, lti.r_sh, lti.r_ol) + extra;
            r_th * f_th / (alpha * alpha * spec.r_s)
        }
        _ => (noise_factor(spec.r_sw, spec.r_s, lti.r_sh, lti.r_ol) + extra) / lti.transducer_gain,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_four_phase() {
        assert!((gamma(4) - 2.0 / (PI * PI)).abs() < 1e-12);
    }

    #[test]
    fn miller_examples() {
        let g = gamma(4);
        assert!((miller_input_impedance(g, 1000.0, 63.1) - 3.16).abs() < 0.01);
        assert!((miller_input_impedance(g, 1000.0, 0.0) - 202.6).abs() < 0.05);
        assert_eq!(miller_input_impedance(g, 1000.0, f64::INFINITY), 0.0);
    }

    #[test]
    fn noise_factor_examples() {
        let inf = f64::INFINITY;
        assert!((noise_factor(12.0, 50.0, inf, inf) - 1.24).abs() < 1e-15);
        assert!((noise_figure_db(1.24) - 0.934).abs() < 1e-3);
        assert_eq!(noise_factor(0.0, 50.0, inf, inf), 1.0);
        let f = noise_factor(12.0, 50.0, 500.0, 1000.0);
        assert!((f - 1.47064).abs() < 1e-5, "{f}");
        assert!((noise_figure_db(f) - 1.675).abs() < 1e-3);
    }

    #[test]
    fn r_ol_examples() {
        assert!(r_ol_estimate(62.0, 30e9, 0.0, 1.0).is_infinite());
        let a = r_ol_estimate(62.0, 30e9, 5e-12, 1.0);
        let b = r_ol_estimate(62.0, 30e9, 10e-12, 1.0);
        assert!((a / b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn r_sh_examples() {
        let resistive = |_f: f64| Ok(C64::new(62.0, 0.0));
        assert!(r_sh_estimate(resistive, 30e9, 1, 0.25).unwrap().is_infinite());
        let mut last = f64::INFINITY;
        for k_max in (3..=15).step_by(2) {
            let r = r_sh_estimate(resistive, 30e9, k_max, 0.25).unwrap();
            assert!(r < last);
            last = r;
        }
        // Infinite sum -> (r_s + r_sw) / (pi^2/8 - 1).
        let r = r_sh_estimate(resistive, 30e9, 200_001, 0.25).unwrap();
        assert!((r - 62.0 / (PI * PI / 8.0 - 1.0)).abs() / r < 1e-4);
    }

    #[test]
    fn low_pass_front_end_raises_r_sh() {
        let lm = ReceiverSpec::nominal_matched(Architecture::LMatch, 30e9).unwrap();
        let direct = ReceiverSpec::nominal(Architecture::MillerMatched, 30e9);
        let r_lm = r_sh_estimate(|f| lm.front_end_impedance(f), 30e9, 99, 0.5).unwrap();
        let r_d = r_sh_estimate(|f| direct.front_end_impedance(f), 30e9, 99, 0.5).unwrap();
        assert!(r_lm >= 10.0 * r_d, "{r_lm} vs {r_d}");
    }

    #[test]
    fn vds_examples() {
        assert!((vds_ratio(12.0, 50.0) - 0.1732).abs() < 1e-4);
        assert_eq!(vds_ratio(0.0, 50.0), 0.0);
        assert!((vds_ratio(100.0, 50.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn iip3_examples() {
        let inf = f64::INFINITY;
        assert!((iip3_cascade(1.0, 1.0, 0.7, inf) - 0.7).abs() < 1e-15);
        assert!((iip3_cascade(0.5, 1.0, 0.7, inf) - 1.4).abs() < 1e-15);
        assert!((iip3_cascade(1.0, 1.0, 1.0, 1.0) - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((volts_to_dbm(1.0) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn spec_validation() {
        let mut s = ReceiverSpec::nominal(Architecture::MillerMatched, 30e9);
        assert!(s.validate().is_ok());
        s.duty = 0.6;
        assert!(matches!(s.validate(), Err(Error::InvalidParameter { name: "duty", .. })));
        let s = ReceiverSpec::nominal(Architecture::LMatch, 30e9);
        assert!(matches!(s.validate(), Err(Error::MissingMatch(_))));
        let mut s = ReceiverSpec::nominal_matched(Architecture::LMatch, 30e9).unwrap();
        s.matching = Some(matchsynth::synth_quarter_wave(12.0, 50.0, 30e9).unwrap());
        assert!(matches!(s.validate(), Err(Error::MatchKindMismatch { .. })));
        let mut s = ReceiverSpec::nominal(Architecture::MillerMatched, 30e9);
        s.n_phases = 8;
        assert!(s.validate().is_err());
    }

    #[test]
    fn quarter_wave_lti_is_matched() {
        let mut s = ReceiverSpec::nominal_matched(Architecture::QuarterWaveDivider, 30e9).unwrap();
        s.a_ol = f64::INFINITY;
        let lti = build_lti(&s, 30e9).unwrap();
        assert!((lti.z_in.re - 50.0).abs() < 0.05 && lti.z_in.im.abs() < 0.05, "{}", lti.z_in);
        assert!((lti.a_mn - vds_ratio(12.0, 50.0) * 2.0).abs() < 1e-9);
    }

    #[test]
    fn l_match_detuned_is_mismatched() {
        let s = ReceiverSpec::nominal_matched(Architecture::LMatch, 30e9).unwrap();
        let lti = build_lti(&s, 60e9).unwrap();
        let s11 = netcore::s11(lti.z_in, 50.0).norm();
        assert!(netcore::db20(s11) > -10.0);
    }

    #[test]
    fn shunt_resistor_dominated_by_shunt() {
        let s = ReceiverSpec::nominal(Architecture::ShuntResistor, 30e9);
        let lti = build_lti(&s, 30e9).unwrap();
        let expect = parallel(&[C64::new(50.0, 0.0), lti.z_term]);
        assert!((lti.z_in - expect).norm() < 1e-12);
        assert!(lti.z_in.re < 50.0);
    }

    #[test]
    fn gain_examples() {
        let mut s = ReceiverSpec::nominal_matched(Architecture::LMatch, 30e9).unwrap();
        let f_rf = 30e9 * (1.0 + 1.0 / 32.0);
        let g = conversion_gain_lti(&s, &build_lti(&s, f_rf).unwrap(), f_rf);
        assert!((15.0..=21.0).contains(&g), "{g}");

        s.a_ol = f64::INFINITY;
        let g1 = conversion_gain_lti(&s, &build_lti(&s, f_rf).unwrap(), f_rf);
        s.r_f *= 2.0;
        let g2 = conversion_gain_lti(&s, &build_lti(&s, f_rf).unwrap(), f_rf);
        assert!((g2 - g1 - netcore::db20(2.0)).abs() < 1e-9);

        s.a_ol = 0.0;
        let g0 = conversion_gain_lti(&s, &build_lti(&s, f_rf).unwrap(), f_rf);
        assert!(g0 < 0.0);
    }

    #[test]
    fn shunt_penalty_at_design() {
        let qw = ReceiverSpec::nominal_matched(Architecture::QuarterWaveDivider, 30e9).unwrap();
        let sh = ReceiverSpec::nominal(Architecture::ShuntResistor, 30e9);
        let nf = |s: &ReceiverSpec| noise_figure_db(noise_factor_arch(s, &build_lti(s, 30e9).unwrap()));
        assert!(nf(&sh) - nf(&qw) >= 3.0, "{} vs {}", nf(&sh), nf(&qw));
    }
}
