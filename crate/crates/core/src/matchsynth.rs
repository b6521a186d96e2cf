//! Matching-network synthesis: quarter-wave divider, fixed L-match, and the
//! series-LC tunable L-match.
//!
//! A synthesized [`MatchSpec`] describes ONE branch. The receiver uses two
//! identical branches (I and Q) in parallel at the antenna, so each branch is
//! designed to present `2 * r_s` when terminated by the switch resistance.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::netcore::{
    cascade, input_impedance, omega, series_element, shunt_element, Termination, TransmissionLine, TwoPort, C64, J,
};

/// Relative effective permittivity used to turn electrical into physical length.
pub const DEFAULT_EPS_EFF: f64 = 4.0;

/// Tunable inductor sizing: l_ser is this multiple of the inductance needed
/// at the lowest frequency of the band.
pub const TUNABLE_L_MARGIN: f64 = 1.5;

const C_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatchSpec {
    QuarterWave {
        z0: f64,
        f_design: f64,
        loss_db_per_mm: f64,
        length_mm: f64,
    },
    LMatch {
        l_ser: f64,
        c_sh: f64,
        f_design: f64,
        /// Inductor quality factor at `f_design`; `None` is lossless.
        inductor_q: Option<f64>,
    },
    TunableLMatch {
        l_ser: f64,
        c_sh: f64,
        c_ser: f64,
        f_design: f64,
        inductor_q: Option<f64>,
    },
}

impl MatchSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            MatchSpec::QuarterWave { .. } => "QuarterWave",
            MatchSpec::LMatch { .. } => "LMatch",
            MatchSpec::TunableLMatch { .. } => "TunableLMatch",
        }
    }

    pub fn f_design(&self) -> f64 {
        match *self {
            MatchSpec::QuarterWave { f_design, .. }
            | MatchSpec::LMatch { f_design, .. }
            | MatchSpec::TunableLMatch { f_design, .. } => f_design,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("{v} must be positive and finite")))
            }
        };
        match *self {
            MatchSpec::QuarterWave {
                z0,
                f_design,
                loss_db_per_mm,
                length_mm,
            } => {
                positive("z0", z0)?;
                positive("f_design", f_design)?;
                if !(loss_db_per_mm >= 0.0) || !(length_mm >= 0.0) {
                    return Err(Error::param("loss_db_per_mm", "loss and length must be >= 0"));
                }
            }
            MatchSpec::LMatch {
                l_ser,
                c_sh,
                f_design,
                inductor_q,
            } => {
                positive("l_ser", l_ser)?;
                positive("c_sh", c_sh)?;
                positive("f_design", f_design)?;
                if let Some(q) = inductor_q {
                    positive("inductor_q", q)?;
                }
            }
            MatchSpec::TunableLMatch {
                l_ser,
                c_sh,
                c_ser,
                f_design,
                inductor_q,
            } => {
                positive("l_ser", l_ser)?;
                positive("c_sh", c_sh)?;
                positive("c_ser", c_ser)?;
                positive("f_design", f_design)?;
                if let Some(q) = inductor_q {
                    positive("inductor_q", q)?;
                }
            }
        }
        Ok(())
    }

    /// The transmission line of a quarter-wave branch.
    pub fn line(&self) -> Option<TransmissionLine> {
        match *self {
            MatchSpec::QuarterWave {
                z0,
                f_design,
                loss_db_per_mm,
                length_mm,
            } => Some(TransmissionLine {
                z0,
                f_ref: f_design,
                electrical_length: PI / 2.0,
                loss_db_per_mm,
                length_mm,
            }),
            _ => None,
        }
    }

    /// Series resistance modelling the inductor loss, zero when lossless.
    pub fn inductor_esr(&self) -> f64 {
        match *self {
            MatchSpec::LMatch {
                l_ser,
                f_design,
                inductor_q: Some(q),
                ..
            }
            | MatchSpec::TunableLMatch {
                l_ser,
                f_design,
                inductor_q: Some(q),
                ..
            } => omega(f_design) * l_ser / q,
            _ => 0.0,
        }
    }

    /// Chain matrix of one branch from the antenna (port 1) to the mixer (port 2).
    pub fn branch(&self, f: f64) -> TwoPort {
        let w = omega(f);
        match *self {
            MatchSpec::QuarterWave { .. } => self.line().expect("quarter wave").two_port(f),
            MatchSpec::LMatch { l_ser, c_sh, .. } => cascade(&[
                shunt_element(J * w * c_sh),
                series_element(J * w * l_ser + self.inductor_esr()),
            ]),
            MatchSpec::TunableLMatch {
                l_ser, c_sh, c_ser, ..
            } => cascade(&[
                shunt_element(J * w * c_sh),
                series_element(series_lc_impedance(l_ser, c_ser, f) + self.inductor_esr()),
            ]),
        }
    }

    /// Input impedance of the two branches in parallel, each loaded by `load`.
    pub fn divider_input(&self, f: f64, load: &Termination) -> Result<C64> {
        Ok(input_impedance(&self.branch(f), load)? / 2.0)
    }
}

/// Quarter-wave branch with `z0 = sqrt(2 r_sw r_s)`; each branch turns `r_sw`
/// into `2 r_s`, and the two in parallel present `r_s`.
pub fn synth_quarter_wave(r_sw: f64, r_s: f64, f_design: f64) -> Result<MatchSpec> {
    if !(r_sw > 0.0) {
        return Err(Error::param("r_sw", "must be positive"));
    }
    if !(r_s > 0.0) {
        return Err(Error::param("r_s", "must be positive"));
    }
    if !(f_design > 0.0) {
        return Err(Error::param("f_design", "must be positive"));
    }
    Ok(MatchSpec::QuarterWave {
        z0: (2.0 * r_sw * r_s).sqrt(),
        f_design,
        loss_db_per_mm: 0.0,
        length_mm: quarter_wave_length_mm(f_design, DEFAULT_EPS_EFF),
    })
}

/// Physical length of a quarter wavelength in mm.
pub fn quarter_wave_length_mm(f: f64, eps_eff: f64) -> f64 {
    C_LIGHT / (4.0 * f * eps_eff.sqrt()) * 1e3
}

/// Q of an L-section transforming `r_low` up to `r_high`.
pub fn l_match_q(r_low: f64, r_high: f64) -> Result<f64> {
    if !(r_low > 0.0) {
        return Err(Error::param("r_low", "must be positive"));
    }
    if r_low >= r_high {
        return Err(Error::UpwardTransformation { r_low, r_high });
    }
    Ok((r_high / r_low - 1.0).sqrt())
}

/// Shunt-C / series-L section: terminated in `r_low` it presents `r_high`.
pub fn synth_l_match(r_low: f64, r_high: f64, f_design: f64) -> Result<MatchSpec> {
    if !(f_design > 0.0) {
        return Err(Error::param("f_design", "must be positive"));
    }
    let q = l_match_q(r_low, r_high)?;
    let w = omega(f_design);
    Ok(MatchSpec::LMatch {
        l_ser: q * r_low / w,
        c_sh: q / (w * r_high),
        f_design,
        inductor_q: None,
    })
}

/// `j(wL - 1/(wC))`; an infinite capacitor leaves the bare inductor.
pub fn series_lc_impedance(l_ser: f64, c_ser: f64, f: f64) -> C64 {
    let w = omega(f);
    let xc = if c_ser.is_infinite() { 0.0 } else { 1.0 / (w * c_ser) };
    C64::new(0.0, w * l_ser - xc)
}

/// Series capacitor that makes `l_ser` look like `l_eff_target` at `f`.
pub fn synth_tunable_cap(l_ser: f64, l_eff_target: f64, f: f64) -> Result<f64> {
    if !(l_eff_target > 0.0) {
        return Err(Error::param("l_eff_target", "must be positive"));
    }
    if l_eff_target >= l_ser {
        return Err(Error::NoPassiveCapacitor {
            l_ser,
            l_eff: l_eff_target,
        });
    }
    let w = omega(f);
    Ok(1.0 / (w * w * (l_ser - l_eff_target)))
}

/// Tunable L-match for the band `[f_low, ...]`, tuned to `f_design`.
///
/// The physical inductor is [`TUNABLE_L_MARGIN`] times the inductance that a
/// plain L-match needs at `f_low`.
pub fn synth_tunable_l_match(r_low: f64, r_high: f64, f_low: f64, f_design: f64) -> Result<MatchSpec> {
    let q = l_match_q(r_low, r_high)?;
    let l_ser = TUNABLE_L_MARGIN * q * r_low / omega(f_low);
    let base = MatchSpec::TunableLMatch {
        l_ser,
        c_sh: 1.0,
        c_ser: 1.0,
        f_design,
        inductor_q: None,
    };
    retune(&base, r_low, r_high, f_design)
}

/// Re-solves `c_sh` and `c_ser` for a new frequency, keeping the inductor.
pub fn retune(spec: &MatchSpec, r_low: f64, r_high: f64, f_new: f64) -> Result<MatchSpec> {
    retune_for_load(spec, C64::new(r_low, 0.0), r_high, f_new)
}

/// [`retune`] against a complex load `r + jx`: the series branch absorbs `x`.
pub fn retune_for_load(spec: &MatchSpec, z_low: Complex64, r_high: f64, f_new: f64) -> Result<MatchSpec> {
    let MatchSpec::TunableLMatch {
        l_ser, inductor_q, ..
    } = *spec
    else {
        return Err(Error::param("spec", "retune needs a TunableLMatch"));
    };
    if !(f_new > 0.0) {
        return Err(Error::param("f_new", "must be positive"));
    }
    let q = l_match_q(z_low.re, r_high)?;
    let w = omega(f_new);
    let l_required = (q * z_low.re - z_low.im) / w;
    if l_required >= l_ser || l_required <= 0.0 {
        return Err(Error::InductorTooSmall {
            f_hz: f_new,
            l_required,
            l_ser,
        });
    }
    let c_ser = synth_tunable_cap(l_ser, l_required, f_new)?;
    Ok(MatchSpec::TunableLMatch {
        l_ser,
        c_sh: q / (w * r_high),
        c_ser,
        f_design: f_new,
        inductor_q,
    })
}
