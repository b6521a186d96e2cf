use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use mixfirst::error::{Error, Result};
use mixfirst::lptv::{self, LoWaveform, SwitchedNetwork};
use mixfirst::matchsynth::MatchSpec;
use mixfirst::netcore::{db20, s11, FrequencyGrid};
use mixfirst::rxmodel;
use mixfirst::sweep::{self, Format, OracleMode, SweepConfig};

#[derive(Parser)]
#[command(name = "mixfirst", version, about = "Mixer-first receiver front-end analysis")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `emit.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Comma separated list of csv, json, svg, s1p.
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<Format>>,
    /// off, verify (conversion matrix) or full (time domain).
    #[arg(long)]
    oracle: Option<OracleMode>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the synthesized matching network of every variant.
    Synth(Common),
    /// Evaluate the configured metrics over the frequency grid.
    Sweep(SweepArgs),
    /// Run the periodic steady state of the switched network and dump waveforms.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// RF frequency; defaults to the middle grid point.
        #[arg(long)]
        freq_ghz: Option<f64>,
    },
    /// Fit the overlap constant against the conversion-matrix oracle.
    Calibrate {
        #[command(flatten)]
        common: Common,
        /// Number of RF points above the LO.
        #[arg(long, default_value_t = 4)]
        points: usize,
    },
    /// Sweep every variant and report the model against the oracle.
    Compare(SweepArgs),
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() || matches!(e, Error::Io { .. }) {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn load(common: &Common) -> Result<SweepConfig> {
    let mut cfg = sweep::load_config(&common.config)?;
    if let Some(dir) = &common.out {
        cfg.out_dir = dir.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Command::Synth(common) => synth(&load(&common)?),
        Command::Sweep(args) => run_sweep(args, false),
        Command::Compare(args) => run_sweep(args, true),
        Command::Simulate { common, freq_ghz } => simulate(&load(&common)?, freq_ghz),
        Command::Calibrate { common, points } => calibrate(&load(&common)?, points),
    }
}

fn match_json(m: &Option<MatchSpec>) -> serde_json::Value {
    match m {
        None => serde_json::Value::Null,
        Some(MatchSpec::QuarterWave { z0, f_design, loss_db_per_mm, length_mm }) => json!({
            "kind": "QuarterWave", "z0_ohm": z0, "f_design_ghz": f_design / 1e9,
            "loss_db_per_mm": loss_db_per_mm, "length_mm": length_mm,
        }),
        Some(MatchSpec::LMatch { l_ser, c_sh, f_design, inductor_q }) => json!({
            "kind": "LMatch", "l_ser_ph": l_ser * 1e12, "c_sh_ff": c_sh * 1e15,
            "f_design_ghz": f_design / 1e9, "inductor_q": inductor_q,
        }),
        Some(MatchSpec::TunableLMatch { l_ser, c_sh, c_ser, f_design, inductor_q }) => json!({
            "kind": "TunableLMatch", "l_ser_ph": l_ser * 1e12, "c_sh_ff": c_sh * 1e15,
            "c_ser_ff": c_ser * 1e15, "f_design_ghz": f_design / 1e9, "inductor_q": inductor_q,
        }),
    }
}

fn print_json(v: &serde_json::Value) {
    use std::io::Write;
    // A closed pipe (e.g. `| head`) is not an error worth a panic.
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(v).expect("json value"));
}

fn synth(cfg: &SweepConfig) -> Result<ExitCode> {
    let mut out = Vec::new();
    for v in &cfg.variants {
        let spec = &v.receiver;
        let f = spec.matching.map(|m| m.f_design()).unwrap_or(spec.f_lo);
        let lti = rxmodel::build_lti(spec, f)?;
        out.push(json!({
            "label": v.label,
            "architecture": spec.architecture.name(),
            "match": match_json(&spec.matching),
            "f_ghz": f / 1e9,
            "zin_re_ohm": lti.z_in.re,
            "zin_im_ohm": lti.z_in.im,
            "s11_db": db20(s11(lti.z_in, spec.r_s).norm()),
        }));
    }
    print_json(&serde_json::Value::Array(out));
    Ok(ExitCode::SUCCESS)
}

fn run_sweep(args: SweepArgs, compare: bool) -> Result<ExitCode> {
    let mut cfg = load(&args.common)?;
    if let Some(f) = args.format {
        if f.contains(&Format::S1p) && !cfg.metrics.contains(&sweep::Metric::Zin) {
            return Err(Error::Config("format: s1p output needs the zin metric".into()));
        }
        cfg.formats = f;
    }
    if let Some(o) = args.oracle {
        cfg.oracle.mode = o;
    }
    if compare && cfg.oracle.mode == OracleMode::Off {
        cfg.oracle.mode = OracleMode::Verify;
    }
    let result = match args.jobs {
        Some(j) => sweep::run_sweep_with_jobs(&cfg, j)?,
        None => sweep::run_sweep(&cfg),
    };
    for p in sweep::emit(&result, &cfg.formats, &cfg.out_dir, &cfg.stem)? {
        eprintln!("wrote {}", p.display());
    }
    if compare {
        report(&result);
    }
    let failed = result.failures();
    if failed > 0 {
        for s in &result.series {
            for r in s.rows.iter().filter(|r| r.error.is_some()) {
                eprintln!("{} @ {:.4} GHz: {}", s.label, r.freq_ghz, r.error.as_deref().unwrap_or(""));
            }
        }
        eprintln!("{failed} point(s) failed");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn report(result: &sweep::SweepResult) {
    println!("{:<20} {:>14} {:>14} {:>12} {:>12}", "series", "max dz_in rel", "max dgain dB", "NF min dB", "at GHz");
    for s in &result.series {
        let ok: Vec<_> = s.rows.iter().filter(|r| r.error.is_none()).collect();
        let dz = ok.iter().filter_map(|r| r.oracle.as_ref()).map(|o| o.delta_zin_rel).fold(0.0, f64::max);
        let dg = ok.iter().filter_map(|r| r.oracle.as_ref()).map(|o| o.delta_gain_db.abs()).fold(0.0, f64::max);
        let best = ok
            .iter()
            .filter_map(|r| r.nf_db.map(|n| (n, r.freq_ghz)))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        let (nf, at) = best.map(|(n, f)| (format!("{n:.3}"), format!("{f:.3}"))).unwrap_or(("-".into(), "-".into()));
        println!("{:<20} {:>14.4} {:>14.3} {:>12} {:>12}", s.label, dz, dg, nf, at);
    }
}

fn simulate(cfg: &SweepConfig, freq_ghz: Option<f64>) -> Result<ExitCode> {
    let v = &cfg.variants[0];
    let f_rf = freq_ghz.map(|f| f * 1e9).unwrap_or(cfg.grid.points()[cfg.grid.len() / 2]);
    let spec = sweep::receiver_at(v, f_rf, cfg.if_ratio)?;
    let net = SwitchedNetwork::from_spec(&spec, 1.0)?;
    let lo = LoWaveform::from_spec(&spec)?;
    let o = &cfg.oracle;
    let trace = lptv::simulate_pss(&net, &lo, f_rf, o.steps_per_period, o.max_periods, o.tol)?;
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let path = cfg.out_dir.join(format!("{}_trace.csv", cfg.stem));
    write_trace(&path, &trace)?;
    eprintln!("wrote {}", path.display());
    let z = lptv::measure_zin(&trace, f_rf);
    print_json(&json!({
        "label": v.label,
        "f_rf_ghz": f_rf / 1e9,
        "f_lo_ghz": spec.f_lo / 1e9,
        "periods": trace.periods,
        "residual": trace.residual,
        "zin_re_ohm": z.re,
        "zin_im_ohm": z.im,
        "gain_db": lptv::measure_conversion_gain(&trace, f_rf, spec.f_lo),
        "vds_ratio": lptv::measure_vds_peak(&trace),
    }));
    Ok(ExitCode::SUCCESS)
}

fn write_trace(path: &Path, trace: &lptv::PssTrace) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    trace.write_csv(std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

fn calibrate(cfg: &SweepConfig, points: usize) -> Result<ExitCode> {
    if points == 0 {
        return Err(Error::Config("points: must be at least 1".into()));
    }
    let spec = cfg.receiver();
    let grid: FrequencyGrid = sweep::default_points(spec.f_lo, points)?;
    let cal = sweep::calibrate_r_ol(spec, &grid)?;
    print_json(&serde_json::to_value(&cal).map_err(|e| Error::Config(e.to_string()))?);
    Ok(ExitCode::SUCCESS)
}
