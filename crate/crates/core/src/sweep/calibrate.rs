use serde::Serialize;

use crate::error::{Error, Result};
use crate::lptv::{self, LoWaveform, SwitchedNetwork, DEFAULT_HARMONICS};
use crate::netcore::FrequencyGrid;
use crate::rxmodel::{self, ReceiverSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationPoint {
    pub f_rf_hz: f64,
    pub oracle_gain_db: f64,
    /// Constant that makes the LTI gain equal the oracle gain at this point.
    pub k_point: f64,
    pub r_ol_ohm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub k_cal: f64,
    /// Relative RMS scatter of the per-point constants about the fit.
    pub residual: f64,
    pub points: Vec<CalibrationPoint>,
}

fn lti_gain(spec: &ReceiverSpec, k: f64, f_rf: f64) -> Result<f64> {
    let mut s = spec.clone();
    s.k_cal = k;
    let lti = rxmodel::build_lti(&s, f_rf)?;
    Ok(rxmodel::conversion_gain_lti(&s, &lti, f_rf))
}

/// Fits the overlap constant of `R_OL = k r_path / (w_LO tau)`.
///
/// At each RF point the switched-network oracle gives the conversion gain;
/// the overlap loading is the `R_OL` for which the LTI model loses the same
/// signal. Those loadings are then fitted by least squares with one `k`.
/// The LO stays at `spec.f_lo`.
pub fn calibrate_r_ol(spec: &ReceiverSpec, f_points: &FrequencyGrid) -> Result<Calibration> {
    spec.validate()?;
    let tau = spec.overlap_tau();
    if tau <= 0.0 {
        return Err(Error::NoOverlap(spec.duty));
    }
    let net = SwitchedNetwork::from_spec(spec, 1.0)?;
    let lo = LoWaveform::from_spec(spec)?;
    let scale = spec.r_path() / (crate::netcore::omega(spec.f_lo) * tau);
    let (k_lo, k_hi) = (1e-6_f64, 1e6_f64);
    let mut points = Vec::with_capacity(f_points.len());
    for f in f_points.iter() {
        if (f - spec.f_lo).abs() < 1e-9 * spec.f_lo {
            return Err(Error::param("f_points", "RF points must differ from the LO"));
        }
        let hb = lptv::harmonic_transfer(&net, &lo, f, DEFAULT_HARMONICS)?;
        let target = lptv::measure_conversion_gain(&hb, f, spec.f_lo);
        if target >= lti_gain(spec, k_hi, f)? || target <= lti_gain(spec, k_lo, f)? {
            return Err(Error::Calibration(format!(
                "oracle gain {target:.3} dB at {:.4} GHz is outside the range the overlap term can reach",
                f / 1e9
            )));
        }
        let (mut a, mut b) = (k_lo.ln(), k_hi.ln());
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if lti_gain(spec, mid.exp(), f)? < target {
                a = mid;
            } else {
                b = mid;
            }
        }
        let k = (0.5 * (a + b)).exp();
        points.push(CalibrationPoint {
            f_rf_hz: f,
            oracle_gain_db: target,
            k_point: k,
            r_ol_ohm: k * scale,
        });
    }
    // R_i = k * scale with a common scale: the least-squares k is the mean.
    let n = points.len() as f64;
    let k_cal = points.iter().map(|p| p.k_point).sum::<f64>() / n;
    let residual = (points.iter().map(|p| (p.k_point - k_cal).powi(2)).sum::<f64>() / n).sqrt() / k_cal;
    Ok(Calibration { k_cal, residual, points })
}

/// RF points `f_lo (1 + m / 32)`, `m = 1..=n`, used by default for calibration.
pub fn default_points(f_lo: f64, n: usize) -> Result<FrequencyGrid> {
    FrequencyGrid::new((1..=n).map(|m| f_lo * (1.0 + m as f64 / 32.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rxmodel::Architecture;

    fn miller(duty: f64) -> ReceiverSpec {
        let mut s = ReceiverSpec::nominal(Architecture::MillerMatched, 30e9);
        s.duty = duty;
        s
    }

    #[test]
    fn fit_is_positive_and_tight() {
        let pts = default_points(30e9, 4).unwrap();
        let a = calibrate_r_ol(&miller(0.5), &pts).unwrap();
        assert!(a.k_cal > 0.0 && a.residual < 0.2, "{a:?}");
        assert_eq!(a, calibrate_r_ol(&miller(0.5), &pts).unwrap());
    }

    #[test]
    fn consistent_across_duty() {
        let pts = default_points(30e9, 4).unwrap();
        let a = calibrate_r_ol(&miller(0.5), &pts).unwrap().k_cal;
        let b = calibrate_r_ol(&miller(0.3), &pts).unwrap().k_cal;
        assert!((a / b - 1.0).abs() < 0.3, "{a} vs {b}");
    }

    #[test]
    fn no_overlap_is_an_error() {
        let pts = default_points(30e9, 2).unwrap();
        let e = calibrate_r_ol(&miller(0.25), &pts).unwrap_err();
        assert!(e.to_string().contains("no overlap to calibrate"));
    }
}
