use rayon::prelude::*;
use serde::Serialize;

use super::config::{Metric, OracleMode, OracleSettings, SweepConfig, Variant};
use crate::error::{Error, Result};
use crate::lptv::{self, LoWaveform, SwitchedNetwork};
use crate::matchsynth::{self, MatchSpec};
use crate::netcore::{db20, s11};
use crate::rxmodel::{self, ReceiverSpec};

/// Fixed-point passes when retuning a tunable match against its own load.
const RETUNE_PASSES: usize = 4;

/// Oracle readings at one point and their difference from the LTI model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub zin_re_ohm: f64,
    pub zin_im_ohm: f64,
    pub gain_db: f64,
    /// `|z_oracle - z_lti| / |z_lti|`.
    pub delta_zin_rel: f64,
    pub delta_gain_db: f64,
    pub vds_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub freq_ghz: f64,
    pub f_lo_ghz: f64,
    pub nf_db: Option<f64>,
    pub gain_db: Option<f64>,
    pub s11_db: Option<f64>,
    pub zin_re_ohm: Option<f64>,
    pub zin_im_ohm: Option<f64>,
    pub iip3_dbm: Option<f64>,
    pub vds_ratio: Option<f64>,
    pub iq_isolation_db: Option<f64>,
    pub oracle: Option<OracleRow>,
    pub error: Option<String>,
}

impl Row {
    fn empty(freq_ghz: f64, f_lo_ghz: f64) -> Self {
        Row {
            freq_ghz,
            f_lo_ghz,
            nf_db: None,
            gain_db: None,
            s11_db: None,
            zin_re_ohm: None,
            zin_im_ohm: None,
            iip3_dbm: None,
            vds_ratio: None,
            iq_isolation_db: None,
            oracle: None,
            error: None,
        }
    }

    pub fn metric(&self, m: Metric) -> Vec<Option<f64>> {
        match m {
            Metric::NfDb => vec![self.nf_db],
            Metric::GainDb => vec![self.gain_db],
            Metric::S11Db => vec![self.s11_db],
            Metric::Zin => vec![self.zin_re_ohm, self.zin_im_ohm],
            Metric::Iip3Dbm => vec![self.iip3_dbm],
            Metric::VdsRatio => vec![self.vds_ratio],
            Metric::IqIsolationDb => vec![self.iq_isolation_db],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub label: String,
    pub architecture: String,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub title: String,
    pub metrics: Vec<Metric>,
    pub oracle: OracleMode,
    pub series: Vec<Series>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.series.iter().flat_map(|s| &s.rows).filter(|r| r.error.is_some()).count()
    }
}

/// The receiver as used at one sweep point: LO placed below `f_rf`, a tunable
/// match retuned against the mixer load it actually sees.
pub fn receiver_at(v: &Variant, f_rf: f64, if_ratio: f64) -> Result<ReceiverSpec> {
    let mut spec = v.receiver.clone();
    spec.f_lo = f_rf / (1.0 + if_ratio);
    if let Some(m @ MatchSpec::TunableLMatch { .. }) = spec.matching {
        let r_high = 2.0 * spec.r_s;
        let mut tuned = matchsynth::retune(&m, spec.r_sw, r_high, f_rf)?;
        for _ in 0..RETUNE_PASSES {
            spec.matching = Some(tuned);
            let lti = rxmodel::build_lti(&spec, f_rf)?;
            tuned = matchsynth::retune_for_load(&m, lti.z_term, r_high, f_rf)?;
        }
        spec.matching = Some(tuned);
    }
    Ok(spec)
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(name.to_string()))
    }
}

/// Evaluates every requested metric of `spec` at `f_rf`.
pub fn evaluate_point(spec: &ReceiverSpec, f_rf: f64, metrics: &[Metric], oracle: &OracleSettings) -> Result<Row> {
    let mut row = Row::empty(f_rf / 1e9, spec.f_lo / 1e9);
    let lti = rxmodel::build_lti(spec, f_rf)?;
    let gain = rxmodel::conversion_gain_lti(spec, &lti, f_rf);
    for m in metrics {
        match m {
            Metric::NfDb => {
                let f = rxmodel::noise_factor_arch(spec, &lti);
                row.nf_db = Some(finite("nf_db", rxmodel::noise_figure_db(f))?);
            }
            Metric::GainDb => row.gain_db = Some(finite("gain_db", gain)?),
            Metric::S11Db => row.s11_db = Some(db20(s11(lti.z_in, spec.r_s).norm()).max(-300.0)),
            Metric::Zin => {
                row.zin_re_ohm = Some(finite("zin", lti.z_in.re)?);
                row.zin_im_ohm = Some(finite("zin", lti.z_in.im)?);
            }
            Metric::Iip3Dbm => {
                let v = rxmodel::iip3_cascade(lti.a_mn, lti.a_mixers, spec.v_iip3_mixer, spec.v_iip3_bb);
                row.iip3_dbm = Some(finite("iip3_dbm", rxmodel::volts_to_dbm(v))?);
            }
            Metric::VdsRatio => row.vds_ratio = Some(lti.i_term.norm() * spec.r_sw),
            Metric::IqIsolationDb => {
                let net = SwitchedNetwork::from_spec(spec, 1.0)?;
                let lo = LoWaveform::from_spec(spec)?;
                let iso = lptv::measure_iq_isolation(&net, &lo, f_rf)?;
                row.iq_isolation_db = Some(iso.min(300.0));
            }
        }
    }
    if oracle.mode != OracleMode::Off {
        let net = SwitchedNetwork::from_spec(spec, 1.0)?;
        let lo = LoWaveform::from_spec(spec)?;
        let (z, g, vds) = match oracle.mode {
            OracleMode::Verify => {
                let hb = lptv::harmonic_transfer(&net, &lo, f_rf, oracle.n_harmonics)?;
                (lptv::measure_zin(&hb, f_rf), lptv::measure_conversion_gain(&hb, f_rf, spec.f_lo), None)
            }
            _ => {
                let tr = lptv::simulate_pss(&net, &lo, f_rf, oracle.steps_per_period, oracle.max_periods, oracle.tol)?;
                (
                    lptv::measure_zin(&tr, f_rf),
                    lptv::measure_conversion_gain(&tr, f_rf, spec.f_lo),
                    Some(lptv::measure_vds_peak(&tr)),
                )
            }
        };
        row.oracle = Some(OracleRow {
            zin_re_ohm: z.re,
            zin_im_ohm: z.im,
            gain_db: g,
            delta_zin_rel: (z - lti.z_in).norm() / lti.z_in.norm().max(1e-12),
            delta_gain_db: g - gain,
            vds_ratio: vds,
        });
    }
    Ok(row)
}

fn run_point(v: &Variant, f_rf: f64, cfg: &SweepConfig) -> Row {
    let f_lo = f_rf / (1.0 + cfg.if_ratio);
    receiver_at(v, f_rf, cfg.if_ratio)
        .and_then(|spec| evaluate_point(&spec, f_rf, &cfg.metrics, &cfg.oracle))
        .unwrap_or_else(|e| {
            let mut row = Row::empty(f_rf / 1e9, f_lo / 1e9);
            row.error = Some(e.to_string());
            row
        })
}

/// Runs every variant over the grid. Points are evaluated in parallel on the
/// current rayon pool; failures are kept per row.
pub fn run_sweep(cfg: &SweepConfig) -> SweepResult {
    let series = cfg
        .variants
        .iter()
        .map(|v| {
            let rows = cfg.grid.points().par_iter().map(|&f| run_point(v, f, cfg)).collect();
            Series {
                label: v.label.clone(),
                architecture: v.receiver.architecture.name().to_string(),
                rows,
            }
        })
        .collect();
    SweepResult {
        title: cfg.title.clone(),
        metrics: cfg.metrics.clone(),
        oracle: cfg.oracle.mode,
        series,
    }
}

/// [`run_sweep`] on a dedicated pool of `jobs` threads.
pub fn run_sweep_with_jobs(cfg: &SweepConfig, jobs: usize) -> Result<SweepResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("jobs: {e}")))?;
    Ok(pool.install(|| run_sweep(cfg)))
}
