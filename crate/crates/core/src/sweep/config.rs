use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::matchsynth::{self, MatchSpec};
use crate::netcore::FrequencyGrid;
use crate::rxmodel::{Architecture, ReceiverSpec};

const GHZ: f64 = 1e9;

/// Metrics a sweep can report, in output column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    NfDb,
    GainDb,
    S11Db,
    Zin,
    Iip3Dbm,
    VdsRatio,
    IqIsolationDb,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::NfDb,
        Metric::GainDb,
        Metric::S11Db,
        Metric::Zin,
        Metric::Iip3Dbm,
        Metric::VdsRatio,
        Metric::IqIsolationDb,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::NfDb => "nf_db",
            Metric::GainDb => "gain_db",
            Metric::S11Db => "s11_db",
            Metric::Zin => "zin",
            Metric::Iip3Dbm => "iip3_dbm",
            Metric::VdsRatio => "vds_ratio",
            Metric::IqIsolationDb => "iq_isolation_db",
        }
    }

    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            Metric::NfDb => &["nf_db"],
            Metric::GainDb => &["gain_db"],
            Metric::S11Db => &["s11_db"],
            Metric::Zin => &["zin_re_ohm", "zin_im_ohm"],
            Metric::Iip3Dbm => &["iip3_dbm"],
            Metric::VdsRatio => &["vds_ratio"],
            Metric::IqIsolationDb => &["iq_isolation_db"],
        }
    }

    /// Axis label used in plots.
    pub fn label(&self) -> &'static str {
        match self {
            Metric::NfDb => "NF [dB]",
            Metric::GainDb => "Voltage Gain [dB]",
            Metric::S11Db => "S11 [dB]",
            Metric::Zin => "Input Impedance [Ohm]",
            Metric::Iip3Dbm => "IIP3 [dBm]",
            Metric::VdsRatio => "Vds / Vs",
            Metric::IqIsolationDb => "I/Q Isolation [dB]",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown metric `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    #[default]
    Off,
    /// Harmonic-balance z_in and gain at every point.
    Verify,
    /// Time-domain steady state at every point, plus V_ds and I/Q isolation.
    Full,
}

impl std::str::FromStr for OracleMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Ok(OracleMode::Off),
            "verify" => Ok(OracleMode::Verify),
            "full" => Ok(OracleMode::Full),
            _ => Err(Error::Config(format!("oracle must be off, verify or full, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
    S1p,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            "s1p" => Ok(Format::S1p),
            _ => Err(Error::Config(format!("unknown format `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatchConfig {
    kind: String,
    f_design_ghz: Option<f64>,
    f_band_low_ghz: Option<f64>,
    z0: Option<f64>,
    loss_db_per_mm: Option<f64>,
    length_mm: Option<f64>,
    l_ser: Option<f64>,
    c_sh: Option<f64>,
    c_ser: Option<f64>,
    inductor_q: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReceiverConfig {
    architecture: Option<String>,
    r_s: Option<f64>,
    r_sw: Option<f64>,
    r_f: Option<f64>,
    a_ol: Option<f64>,
    c_bb: Option<f64>,
    f_lo_ghz: Option<f64>,
    duty: Option<f64>,
    rise_fraction: Option<f64>,
    r_off: Option<f64>,
    r_shunt: Option<f64>,
    r_per_path: Option<f64>,
    a_mixers: Option<f64>,
    k_cal: Option<f64>,
    k_max: Option<usize>,
    v_iip3_mixer: Option<f64>,
    v_iip3_bb: Option<f64>,
    bb_noise_excess: Option<f64>,
    amp_pole_ghz: Option<f64>,
    #[serde(rename = "match")]
    matching: Option<MatchConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridConfig {
    start_ghz: Option<f64>,
    stop_ghz: Option<f64>,
    points: Option<usize>,
    points_ghz: Option<Vec<f64>>,
    if_ratio: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct OracleConfig {
    mode: Option<OracleMode>,
    n_harmonics: Option<usize>,
    steps_per_period: Option<usize>,
    max_periods: Option<usize>,
    tol: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmitConfig {
    formats: Option<Vec<Format>>,
    dir: Option<PathBuf>,
    stem: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    title: Option<String>,
    receiver: Option<toml::Table>,
    grid: GridConfig,
    metrics: Option<Vec<Metric>>,
    oracle: Option<OracleConfig>,
    emit: Option<EmitConfig>,
    compare: Option<Vec<toml::Table>>,
}

/// Oracle engine settings.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSettings {
    pub mode: OracleMode,
    pub n_harmonics: usize,
    pub steps_per_period: usize,
    pub max_periods: usize,
    pub tol: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            mode: OracleMode::Off,
            n_harmonics: crate::lptv::DEFAULT_HARMONICS,
            steps_per_period: crate::lptv::DEFAULT_STEPS_PER_PERIOD,
            max_periods: crate::lptv::DEFAULT_MAX_PERIODS,
            tol: crate::lptv::DEFAULT_TOL,
        }
    }
}

/// One receiver of a sweep; comparisons hold several.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub label: String,
    pub receiver: ReceiverSpec,
    /// Lower band edge used to size a tunable inductor.
    pub f_band_low: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub title: String,
    pub variants: Vec<Variant>,
    pub grid: FrequencyGrid,
    /// LO sits at `f_rf / (1 + if_ratio)` at every point.
    pub if_ratio: f64,
    pub metrics: Vec<Metric>,
    pub oracle: OracleSettings,
    pub formats: Vec<Format>,
    pub out_dir: PathBuf,
    pub stem: String,
}

impl SweepConfig {
    /// The single receiver of a plain sweep, or the first of a comparison.
    pub fn receiver(&self) -> &ReceiverSpec {
        &self.variants[0].receiver
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<SweepConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

fn cfg_err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {msg}"))
}

pub fn parse_config(text: &str) -> Result<SweepConfig> {
    let file: FileConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;

    let grid = match (&file.grid.points_ghz, file.grid.start_ghz, file.grid.stop_ghz, file.grid.points) {
        (Some(p), None, None, None) => FrequencyGrid::new(p.iter().map(|f| f * GHZ).collect()),
        (None, Some(a), Some(b), Some(n)) => FrequencyGrid::linear(a * GHZ, b * GHZ, n),
        _ => {
            return Err(cfg_err(
                "grid",
                "give either points_ghz or all of start_ghz, stop_ghz and points",
            ))
        }
    }
    .map_err(|e| cfg_err("grid", e))?;
    let if_ratio = file.grid.if_ratio.unwrap_or(1.0 / 32.0);
    if !(if_ratio > 0.0 && if_ratio < 1.0) {
        return Err(cfg_err("grid.if_ratio", "must be in (0, 1)"));
    }

    let metrics = match file.metrics {
        None => Metric::ALL.to_vec(),
        Some(m) if m.is_empty() => return Err(cfg_err("metrics", "at least one metric is required")),
        Some(mut m) => {
            m.sort();
            m.dedup();
            m
        }
    };

    let mut oracle = OracleSettings::default();
    if let Some(o) = file.oracle {
        oracle.mode = o.mode.unwrap_or_default();
        oracle.n_harmonics = o.n_harmonics.unwrap_or(oracle.n_harmonics);
        oracle.steps_per_period = o.steps_per_period.unwrap_or(oracle.steps_per_period);
        oracle.max_periods = o.max_periods.unwrap_or(oracle.max_periods);
        oracle.tol = o.tol.unwrap_or(oracle.tol);
    }
    if oracle.n_harmonics < 5 {
        return Err(cfg_err("oracle.n_harmonics", "must be at least 5"));
    }
    if oracle.steps_per_period < 256 {
        return Err(cfg_err("oracle.steps_per_period", "must be at least 256"));
    }
    if !(oracle.tol > 0.0) {
        return Err(cfg_err("oracle.tol", "must be positive"));
    }

    let emit = file.emit.unwrap_or(EmitConfig { formats: None, dir: None, stem: None });
    let formats = emit.formats.unwrap_or_else(|| vec![Format::Csv]);
    if formats.contains(&Format::S1p) && !metrics.contains(&Metric::Zin) {
        return Err(cfg_err("emit.formats", "s1p output needs the zin metric"));
    }

    let f_mid = grid.points()[grid.len() / 2];
    let f_min = grid.points()[0];
    let base = file.receiver.unwrap_or_default();
    let mut variants = Vec::new();
    match file.compare {
        None => variants.push(build_variant("receiver", "receiver", &base, f_mid, f_min, if_ratio)?),
        Some(list) => {
            if list.is_empty() {
                return Err(cfg_err("compare", "needs at least one entry"));
            }
            for (i, entry) in list.iter().enumerate() {
                let mut merged = base.clone();
                let mut label = format!("variant{i}");
                for (k, v) in entry {
                    if k == "label" {
                        label = v.as_str().ok_or_else(|| cfg_err("compare.label", "must be a string"))?.to_string();
                    } else {
                        merged.insert(k.clone(), v.clone());
                    }
                }
                let field = format!("compare[{i}]");
                variants.push(build_variant(&label, &field, &merged, f_mid, f_min, if_ratio)?);
            }
        }
    }

    Ok(SweepConfig {
        title: file.title.unwrap_or_else(|| "sweep".into()),
        variants,
        grid,
        if_ratio,
        metrics,
        oracle,
        formats,
        out_dir: emit.dir.unwrap_or_else(|| PathBuf::from(".")),
        stem: emit.stem.unwrap_or_else(|| "sweep".into()),
    })
}

fn build_variant(
    label: &str,
    field: &str,
    table: &toml::Table,
    f_mid: f64,
    f_min: f64,
    if_ratio: f64,
) -> Result<Variant> {
    let rc: ReceiverConfig = table
        .clone()
        .try_into()
        .map_err(|e: toml::de::Error| cfg_err(field, e.message()))?;
    let arch: Architecture = match &rc.architecture {
        Some(a) => a.parse().map_err(|e| cfg_err(&format!("{field}.architecture"), e))?,
        None => Architecture::MillerMatched,
    };
    let f_lo = rc.f_lo_ghz.map(|f| f * GHZ).unwrap_or(f_mid / (1.0 + if_ratio));
    let mut spec = ReceiverSpec::nominal(arch, f_lo);
    let set = |dst: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *dst = v;
        }
    };
    set(&mut spec.r_s, rc.r_s);
    set(&mut spec.r_sw, rc.r_sw);
    set(&mut spec.r_f, rc.r_f);
    set(&mut spec.a_ol, rc.a_ol);
    set(&mut spec.c_bb, rc.c_bb);
    set(&mut spec.duty, rc.duty);
    set(&mut spec.rise_fraction, rc.rise_fraction);
    set(&mut spec.r_off, rc.r_off);
    set(&mut spec.r_shunt, rc.r_shunt);
    set(&mut spec.r_per_path, rc.r_per_path);
    set(&mut spec.a_mixers, rc.a_mixers);
    set(&mut spec.k_cal, rc.k_cal);
    set(&mut spec.v_iip3_mixer, rc.v_iip3_mixer);
    set(&mut spec.v_iip3_bb, rc.v_iip3_bb);
    set(&mut spec.bb_noise_excess, rc.bb_noise_excess);
    if let Some(k) = rc.k_max {
        spec.k_max = k;
    }
    spec.amp_pole_hz = rc.amp_pole_ghz.map(|f| f * GHZ);

    let mut f_band_low = f_min;
    if let Some(m) = &rc.matching {
        let mfield = format!("{field}.match");
        if let Some(f) = m.f_band_low_ghz {
            f_band_low = f * GHZ;
        }
        spec.matching = Some(build_match(&spec, m, f_mid, f_band_low).map_err(|e| cfg_err(&mfield, e))?);
    }
    spec.validate().map_err(|e| cfg_err(field, e))?;
    Ok(Variant {
        label: label.to_string(),
        receiver: spec,
        f_band_low,
    })
}

fn build_match(spec: &ReceiverSpec, m: &MatchConfig, f_mid: f64, f_band_low: f64) -> Result<MatchSpec> {
    let f_design = m.f_design_ghz.map(|f| f * GHZ).unwrap_or(f_mid);
    let r_high = 2.0 * spec.r_s;
    let spec = match m.kind.as_str() {
        "QuarterWave" => {
            let MatchSpec::QuarterWave { z0, length_mm, .. } = matchsynth::synth_quarter_wave(spec.r_sw, spec.r_s, f_design)?
            else {
                unreachable!()
            };
            MatchSpec::QuarterWave {
                z0: m.z0.unwrap_or(z0),
                f_design,
                loss_db_per_mm: m.loss_db_per_mm.unwrap_or(0.0),
                length_mm: m.length_mm.unwrap_or(length_mm),
            }
        }
        "LMatch" => {
            let MatchSpec::LMatch { l_ser, c_sh, .. } = matchsynth::synth_l_match(spec.r_sw, r_high, f_design)? else {
                unreachable!()
            };
            MatchSpec::LMatch {
                l_ser: m.l_ser.unwrap_or(l_ser),
                c_sh: m.c_sh.unwrap_or(c_sh),
                f_design,
                inductor_q: m.inductor_q,
            }
        }
        "TunableLMatch" => {
            let MatchSpec::TunableLMatch { l_ser, c_sh, c_ser, .. } =
                matchsynth::synth_tunable_l_match(spec.r_sw, r_high, f_band_low.min(f_design), f_design)?
            else {
                unreachable!()
            };
            MatchSpec::TunableLMatch {
                l_ser: m.l_ser.unwrap_or(l_ser),
                c_sh: m.c_sh.unwrap_or(c_sh),
                c_ser: m.c_ser.unwrap_or(c_ser),
                f_design,
                inductor_q: m.inductor_q,
            }
        }
        other => {
            return Err(Error::param(
                "kind",
                format!("unknown match kind `{other}` (QuarterWave, LMatch, TunableLMatch)"),
            ))
        }
    };
    spec.validate()?;
    Ok(spec)
}
